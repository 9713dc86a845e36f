import math

import numpy as np
import pytest
from scipy import stats

from solenoid_walk.distribution import make_distribution
from solenoid_walk.group import DepthExceededError, GroupSequence
from solenoid_walk.solenoid import (
    SolenoidPoint,
    char_fn,
    char_values,
    compatibility_residual,
    depth_for_tolerance,
    extend,
    haar_sample,
    haar_sample_batch,
    modulus_gap_check,
    reduce_angle,
)

SEQS = [GroupSequence.constant(2), GroupSequence.constant(3), GroupSequence((2, 3, 4)), GroupSequence((5, 2, 7))]


def test_reduce_angle_range():
    x = np.array([-math.pi, math.pi, 3 * math.pi, -3 * math.pi, 0.0, 7.0, -7.0])
    r = reduce_angle(x)
    assert np.all(r >= -math.pi) and np.all(r < math.pi)
    assert np.allclose(np.cos(r), np.cos(x)) and np.allclose(np.sin(r), np.sin(x), atol=1e-12)


@pytest.mark.parametrize("seq", SEQS, ids=str)
def test_haar_marginals_uniform_and_compatible(seq):
    B = haar_sample_batch(seq, 12, 100_000, np.random.default_rng(3))
    assert compatibility_residual(seq, B) < 1e-9
    assert np.all(B >= -math.pi) and np.all(B < math.pi)
    for n in (0, 5, 11):
        p = stats.kstest(B[:, n], stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue
        assert p > 1e-3


def test_e0_fraction_a3(rng):
    seq = GroupSequence.constant(3)
    B = haar_sample_batch(seq, 4, 100_000, rng)
    frac = np.mean(np.abs(B[:, 0]) > math.pi / 3)
    assert abs(frac - 2 / 3) < 3 * math.sqrt((2 / 9) / 100_000)


def test_depth_cap_enforced(rng):
    seq = GroupSequence.constant(2, depth_cap=10)
    with pytest.raises(DepthExceededError):
        haar_sample(seq, 11, rng)


def test_extend_zero_point(rng):
    seq = GroupSequence.constant(2)
    hits = [extend(seq, SolenoidPoint.zero(1), 2, rng).angles[1] for _ in range(10_000)]
    hits = np.array(hits)
    assert set(np.unique(hits)) <= {0.0, -math.pi}
    assert abs(np.mean(hits == 0.0) - 0.5) < 3 * 0.5 / 100


def test_extend_then_truncate(rng):
    seq = GroupSequence((2, 3, 4))
    p = haar_sample(seq, 5, rng)
    q = extend(seq, p, 20, rng)
    assert q.truncate(5) == p
    assert compatibility_residual(seq, q.angles) < 1e-9


def test_extension_marginal_uniform(rng):
    seq = GroupSequence.constant(3)
    B = haar_sample_batch(seq, 3, 20_000, rng)
    deep = np.array([extend(seq, SolenoidPoint.from_array(b), 9, rng).angles[-1] for b in B[:2000]])
    assert stats.kstest(deep, stats.uniform(-math.pi, 2 * math.pi).cdf).pvalue > 1e-3


def test_char_fn_examples():
    seq = GroupSequence.constant(2)
    unit = make_distribution({"family": "finite_support", "table": {"0": 1.0}}, seq)
    assert char_fn(unit, SolenoidPoint((-math.pi,))).value == -1.0
    geo = make_distribution({"family": "geometric", "r": "1/2"}, seq)
    cv = char_fn(geo, SolenoidPoint((-math.pi, -math.pi / 2)))
    assert cv.value == pytest.approx(-0.5, abs=1e-15)
    assert cv.truncation_error_bound == 0.5
    zero = char_fn(geo, SolenoidPoint.zero(30))
    assert zero.value == pytest.approx(1 - 2.0**-30, abs=1e-15)
    assert zero.truncation_error_bound == pytest.approx(2 * 2.0**-30)


def test_char_fn_bounds_and_depth_stability(rng):
    seq = GroupSequence((2, 3, 4))
    d = make_distribution({"family": "power_law", "s": 2}, seq)
    B = haar_sample_batch(seq, 40, 5000, rng)
    deep, bound_deep = char_values(d, B)
    assert np.all(np.abs(deep) <= 1 + bound_deep)
    for J in (3, 10, 25):
        shallow, bound = char_values(d, B[:, :J])
        assert np.all(np.abs(shallow - deep) <= bound + 1e-12)


def test_depth_for_tolerance():
    d = make_distribution({"family": "geometric", "r": "1/2"}, GroupSequence.constant(2))
    J = depth_for_tolerance(d, 1e-6)
    assert 2 * d.tail(J) <= 1e-6 < 2 * d.tail(J - 1)


def test_modulus_gap_geometric(rng):
    d = make_distribution({"family": "geometric", "r": "1/2"}, GroupSequence.constant(2))
    rep = modulus_gap_check(d, 10_000, 8, rng)
    assert rep.applicable and rep.violations == 0 and rep.min_gap > 0
    assert not rep.parity_point


def test_modulus_gap_not_applicable(rng):
    d = make_distribution({"family": "finite_support", "table": {"0": 1.0}}, GroupSequence.constant(2))
    assert not modulus_gap_check(d, 100, 8, rng).applicable


def test_modulus_gap_parity_point(rng):
    # with every a_j odd, (pi, pi, ...) is compatible and mu_hat there is -1
    seq = GroupSequence.constant(3)
    d = make_distribution({"family": "geometric", "r": "1/2"}, seq)
    rep = modulus_gap_check(d, 2000, 8, rng)
    assert rep.parity_point
    vals, _ = char_values(d, np.full((1, 30), -math.pi))
    assert vals[0] == pytest.approx(-1 + d.tail(30), abs=1e-12)
