import math

import numpy as np
import pytest

from solenoid_walk.distribution import make_distribution
from solenoid_walk.integral import (
    bound_check_cosine,
    bound_check_lower_chain,
    bound_check_majorant,
    cell_lower_bound,
    cell_upper_bound,
    estimate_cell_integral,
    estimate_direct,
    estimate_total,
    geometric_series_tail,
    lower_chain_constant,
    majorant_constants,
    residual_majorant,
)


def direct_tail_sum(a):
    k = np.arange(1, int(80 / a) + 2, dtype=float)
    return math.fsum(np.exp(-a * k) / np.sqrt(k))


class TestCosineBounds:
    def test_grid_has_no_violations(self):
        rep = bound_check_cosine(10_000)
        assert rep.violations == 0
        assert rep.worst_margin >= 0

    @pytest.mark.parametrize("t, lo, val, hi", [
        (0.0, 0.0, 0.0, 0.0),
        (math.pi / 2, 0.5, 1.0, math.pi**2 / 8),
    ])
    def test_endpoints(self, t, lo, val, hi):
        assert 2 * t * t / math.pi**2 == pytest.approx(lo)
        assert 1 - math.cos(t) == pytest.approx(val, abs=1e-15)
        assert t * t / 2 == pytest.approx(hi)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValueError):
            bound_check_cosine(1)


class TestGeometricTail:
    def test_value_at_one(self):
        assert direct_tail_sum(1.0) == pytest.approx(0.506030119872936, abs=1e-12)
        assert geometric_series_tail(1.0) == pytest.approx(math.sqrt(math.pi) + math.exp(-1))

    @pytest.mark.parametrize("a", [0.001, 0.01, 0.1, 0.5, 1, 2, 10, 50])
    def test_bound_dominates(self, a):
        assert geometric_series_tail(a) >= direct_tail_sum(a)

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_domain(self, a):
        with pytest.raises(ValueError):
            geometric_series_tail(a)


class TestCellIntegral:
    def test_unit_step_oracle(self, a2, unit_steps):
        # mu_hat = cos b_1 and E_0 is |b_1| > pi/2: average of 1/(1 - cos) over that arc is 1/pi each half
        c = estimate_cell_integral(a2, unit_steps, 0, 100_000, 12, np.random.default_rng(3))
        assert c.measure == 0.5
        assert abs(c.estimate - 1 / math.pi) <= 3 * c.stderr
        assert c.stderr < 1e-4

    @pytest.mark.parametrize("n", range(6))
    def test_at_least_half_measure(self, a2, transient, n):
        c = estimate_cell_integral(a2, transient, n, 4000, n + 12, np.random.default_rng(n))
        assert c.estimate >= c.measure / 2 - 3 * c.stderr

    def test_systematic_band_brackets(self, a2, transient):
        c = estimate_cell_integral(a2, transient, 3, 4000, 10, np.random.default_rng(0))
        assert c.systematic_lo <= c.estimate <= c.systematic_hi
        assert not c.unstable

    def test_shallow_depth_is_unstable(self, a2):
        heavy = make_distribution({"family": "geometric", "r": "9/10"}, a2)
        c = estimate_cell_integral(a2, heavy, 2, 2000, 4, np.random.default_rng(0))
        assert c.unstable and c.systematic_hi == math.inf

    def test_depth_must_cover_cell(self, a2, transient):
        with pytest.raises(ValueError):
            estimate_cell_integral(a2, transient, 5, 100, 6, np.random.default_rng(0))

    @pytest.mark.parametrize("n", [1, 2, 4, 6])
    def test_below_upper_bound(self, a2, transient, n):
        c = estimate_cell_integral(a2, transient, n, 20_000, n + 14, np.random.default_rng(n))
        ub = cell_upper_bound(a2, transient, n)
        assert c.estimate <= ub["quadrature"] + 3 * c.stderr
        assert ub["quadrature"] <= ub["chain"]


class TestTotals:
    def test_stratified_matches_direct(self, a2, transient):
        tot = estimate_total(a2, transient, 6, 40_000, 12, seed=9)
        direct, se = estimate_direct(a2, transient, 6, 100_000, 12, np.random.default_rng(9))
        strat_se = math.sqrt(sum(c.stderr**2 for c in tot.cells))
        assert abs(tot.partial_total - direct) <= 4 * math.hypot(se, strat_se)

    def test_worker_count_does_not_change_result(self, a2, transient):
        one = estimate_total(a2, transient, 5, 2000, 10, seed=1, workers=1)
        four = estimate_total(a2, transient, 5, 2000, 10, seed=1, workers=4)
        assert one.to_dict() == four.to_dict()

    def test_single_cell(self, a2, transient):
        tot = estimate_total(a2, transient, 0, 2000, 4, seed=2)
        assert len(tot.cells) == 1
        assert tot.residual_measure == "1/2"
        assert not tot.diverging

    def test_partial_totals_are_cumulative(self, a2, transient):
        tot = estimate_total(a2, transient, 4, 2000, 8, seed=2)
        assert np.allclose(np.diff(tot.partial_totals), [c.estimate for c in tot.cells[1:]])

    def test_diverging_flags(self, a2, recurrent, transient):
        rec = estimate_total(a2, recurrent, 12, 4000, 40, seed=3)
        tra = estimate_total(a2, transient, 12, 4000, 16, seed=3)
        assert rec.diverging and not tra.diverging
        assert rec.residual_bound is None and rec.residual_note.startswith("unbounded-unknown")
        assert tra.residual_bound is not None and 0 < tra.residual_bound < 1

    def test_finite_support_residual_is_unknown(self, a2, unit_steps):
        tot = estimate_total(a2, unit_steps, 0, 2000, 4, seed=0)
        assert tot.residual_bound is None

    def test_depth_guard(self, a2, transient):
        with pytest.raises(ValueError):
            estimate_total(a2, transient, 10, 100, 11, seed=0)


class TestMajorant:
    def test_constants(self, a3):
        d = make_distribution({"family": "geometric", "r": "1/2"}, a3)
        assert majorant_constants(d) == {"C3": pytest.approx(1 / math.pi**2), "C4": 2.0}

    @pytest.mark.parametrize("n", range(1, 6))
    def test_no_violations(self, a3, n):
        d = make_distribution({"family": "geometric", "r": "1/2"}, a3)
        rep = bound_check_majorant(a3, d, n, 10_000, np.random.default_rng(n))
        assert rep.applicable and rep.violations == 0

    @pytest.mark.parametrize("n", range(1, 5))
    def test_no_violations_mixed_base(self, a234, n):
        d = make_distribution({"family": "power_law", "s": 2}, a234)
        rep = bound_check_majorant(a234, d, n, 5000, np.random.default_rng(n))
        assert rep.violations == 0

    def test_not_applicable(self, a2, unit_steps, transient):
        assert not bound_check_majorant(a2, unit_steps, 1, 100, np.random.default_rng(0)).applicable
        assert not bound_check_majorant(a2, transient, 0, 100, np.random.default_rng(0)).applicable


class TestLowerChain:
    def test_constant_for_base_two(self, a2):
        # pi^2/4 * sum 4^{-j} = pi^2/3
        assert lower_chain_constant(a2) == pytest.approx(math.pi**2 / 3, rel=1e-12)

    def test_constant_floor(self):
        from solenoid_walk.group import GroupSequence
        assert lower_chain_constant(GroupSequence.constant(5)) == 2.0

    @pytest.mark.parametrize("n", range(1, 6))
    def test_chain_holds(self, a2, recurrent, n):
        rep = bound_check_lower_chain(a2, recurrent, n, 10_000, np.random.default_rng(n), depth=40)
        assert rep.violations == 0

    @pytest.mark.parametrize("n", range(1, 8))
    def test_cell_estimate_above_lower_bound(self, a2, recurrent, n):
        c = estimate_cell_integral(a2, recurrent, n, 10_000, 40, np.random.default_rng(n))
        assert c.estimate + 3 * c.stderr >= cell_lower_bound(a2, recurrent, n)

    def test_no_tail_no_default(self, a2, unit_steps):
        assert cell_lower_bound(a2, unit_steps, 1) is None
        assert cell_lower_bound(a2, unit_steps, 1, alpha=0.5) > 0


def test_residual_majorant_decays(a2, transient, recurrent):
    r5, r10 = residual_majorant(a2, transient, 5), residual_majorant(a2, transient, 10)
    assert r5 > r10 > 0
    assert residual_majorant(a2, recurrent, 5) is None
