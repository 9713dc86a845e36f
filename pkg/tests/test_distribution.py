import math

import numpy as np
import pytest
from scipy import stats

from solenoid_walk.distribution import (
    DistributionError,
    family_from_dict,
    family_to_dict,
    make_distribution,
    sample_indices,
    sample_step,
    sample_steps,
)
from solenoid_walk.group import Arithmetic, GroupSequence

A2 = GroupSequence.constant(2)
FAMILIES = [
    {"family": "geometric", "r": "1/2"},
    {"family": "geometric", "r": "9/10"},
    {"family": "solenoid_matched", "kappa": 2},
    {"family": "solenoid_matched", "kappa": "3/2"},
    {"family": "power_law", "s": 2},
    {"family": "finite_support", "table": {"0": 0.5, "3": 0.5}},
    {"family": "custom_table", "table": [0.5, 0.25, 0.125, 0.125]},
]
SEQS = [A2, GroupSequence((2, 3, 4)), GroupSequence((2,), Arithmetic(1))]


def test_geometric_examples():
    d = make_distribution({"family": "geometric", "r": 0.5}, A2)
    assert d.q(0) == 0.5 and d.q(1) == 0.25
    assert d.tail(1) == 0.5 and d.tail(3) == 0.125


def test_solenoid_matched_closed_form():
    d = make_distribution({"family": "solenoid_matched", "kappa": 2}, A2)
    for n in range(30):
        assert d.q(n) == pytest.approx(0.75 * 4.0**-n, rel=1e-14)
        assert d.tail(n) == pytest.approx(4.0**-n, rel=1e-14)
    # beyond the tabulated range the closed form still answers
    assert d.tail(100) == pytest.approx(4.0**-100, rel=1e-12)


def test_power_law_tail():
    d = make_distribution({"family": "power_law", "s": 2}, A2)
    assert d.tail(1) == pytest.approx(1 - 6 / math.pi**2, rel=1e-13)


def test_finite_support():
    d = make_distribution({"family": "finite_support", "table": {"0": 1.0}}, A2)
    assert d.q(0) == 1.0 and d.tail(1) == 0.0
    assert d.finite_support and not d.positive and d.max_index == 0


@pytest.mark.parametrize("bad", [
    {"family": "geometric", "r": 1},
    {"family": "geometric", "r": 0},
    {"family": "solenoid_matched", "kappa": 0},
    {"family": "power_law", "s": 1},
    {"family": "finite_support", "table": {"0": -0.5, "1": 1.5}},
    {"family": "finite_support", "table": {"0": 0.7, "1": 0.7}},
    {"family": "custom_table", "table": []},
])
def test_invalid_parameters(bad):
    with pytest.raises(DistributionError):
        make_distribution(bad, A2)


def test_unknown_family():
    with pytest.raises(DistributionError):
        family_from_dict({"family": "cauchy"})


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s["family"])
@pytest.mark.parametrize("seq", SEQS, ids=str)
def test_invariants(spec, seq):
    d = make_distribution(spec, seq)
    w, Q = d.weights, d.tails
    assert np.all(w >= 0)
    assert Q[0] == 1.0
    assert np.all(np.diff(Q) <= 1e-15)
    for n in range(seq.depth_cap + 1):
        assert abs(Q[n] - Q[n + 1] - w[n]) <= 1e-12
    for J in range(seq.depth_cap):
        assert abs(math.fsum(w[: J + 1]) + Q[J + 1] - 1) <= 1e-12


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s["family"])
def test_descriptor_round_trip(spec):
    f = family_from_dict(spec)
    assert family_from_dict(family_to_dict(f)) == f


def test_sample_step_unit(rng):
    d = make_distribution({"family": "finite_support", "table": {"0": 1.0}}, A2)
    j, s, _ = sample_steps(d, rng, 10_000)
    assert np.all(j == 0)
    assert abs(s.mean()) < 3 / math.sqrt(10_000)
    assert sample_step(d, rng)[0] == 0


def test_sample_frequencies(rng):
    d = make_distribution({"family": "geometric", "r": "1/2"}, A2)
    N = 100_000
    j, s, _ = sample_steps(d, rng, N)
    p0 = np.mean(j == 0)
    assert abs(p0 - 0.5) < 3 * math.sqrt(0.25 / N)
    assert abs(s.mean()) < 3 / math.sqrt(N)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: s["family"])
def test_sampler_chi_square(spec):
    seq = GroupSequence((2, 3, 4))
    d = make_distribution(spec, seq)
    N = 100_000
    j, _ = sample_indices(d, np.random.default_rng(99), N)
    # redraws condition on j <= depth_cap; pool small expected counts into one tail bin
    cap = seq.depth_cap
    expected = d.weights * N
    top = int(np.max(np.flatnonzero(expected >= 20)))
    obs = np.bincount(np.minimum(j, top + 1), minlength=top + 2)[: top + 2]
    exp = np.append(expected[: top + 1], N * (d.tails[top + 1] - d.tails[cap + 1]))
    keep = exp > 0
    assert obs[~keep].sum() == 0
    p = stats.chisquare(obs[keep], exp[keep] * obs.sum() / exp[keep].sum()).pvalue
    assert p > 1e-3


def test_redraws_beyond_cap(rng):
    seq = GroupSequence.constant(2, depth_cap=4)
    d = make_distribution({"family": "geometric", "r": "1/2"}, seq)
    j, redraws = sample_indices(d, rng, 20_000)
    assert j.max() <= 4
    assert redraws > 0  # Q_5 = 1/32 of draws land beyond the cap
    assert abs(redraws / 20_000 - 1 / 32) < 0.01
