"""The compiled kernels and the numpy fallback must agree."""
import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoid_walk import _fallback, kernels
from solenoid_walk.distribution import make_distribution, sample_steps
from solenoid_walk.group import Arithmetic, GroupSequence
from solenoid_walk.solenoid import haar_sample_batch
from solenoid_walk.walker import walk_exact

compiled = pytest.importorskip("solenoid_walk._kernels") if kernels.BACKEND == "compiled" else None
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")

SEQS = [GroupSequence.constant(2), GroupSequence((2, 3, 4)), GroupSequence((2,), Arithmetic(1))]


def a_array(seq):
    return np.array(seq.prefix(seq.depth_cap), dtype=np.int64)


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_env_forces_fallback():
    code = "import solenoid_walk.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, SOLENOID_WALK_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_ext
def test_cos_deficit_parity(rng):
    seq = GroupSequence((2, 3, 4))
    B = haar_sample_batch(seq, 30, 2000, rng)
    q = np.ascontiguousarray(make_distribution({"family": "power_law", "s": 2}, seq).weights[:30])
    np.testing.assert_allclose(compiled.cos_deficit(B, q), _fallback.cos_deficit(B, q), rtol=1e-13, atol=1e-16)


@needs_ext
@pytest.mark.parametrize("seq", SEQS, ids=str)
@pytest.mark.parametrize("spec", [{"family": "geometric", "r": "1/2"}, {"family": "geometric", "r": "4/5"},
                                  {"family": "solenoid_matched", "kappa": 2}], ids=lambda s: s["family"])
def test_walk_parity(seq, spec):
    d = make_distribution(spec, seq)
    rng = np.random.default_rng(5)
    for T in (1, 7, 3000):
        j, s, _ = sample_steps(d, rng, T)
        cps = np.array(sorted({1, max(1, T // 2), T}), dtype=np.int64)
        ref = walk_exact(j, s, seq, cps)
        for impl in (compiled.walk_canonical, _fallback.walk_canonical):
            visits, last, m, level, overflow = impl(j, s, a_array(seq), cps)
            if not overflow:
                assert visits.tolist() == ref[0].tolist()
                assert (last, m, level) == ref[1:]


@needs_ext
@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.sampled_from([-1, 1])), min_size=1, max_size=300))
def test_reduced_loop_matches_exact(steps):
    seq = GroupSequence((2, 3, 4))
    j = np.array([s[0] for s in steps], dtype=np.int64)
    sg = np.array([s[1] for s in steps], dtype=np.int8)
    cps = np.array([len(steps)], dtype=np.int64)
    visits, last, m, level, overflow = compiled.walk_reduced(j, sg, a_array(seq), cps)
    assert not overflow
    ref = walk_exact(j, sg, seq, cps)
    assert visits.tolist() == ref[0].tolist() and (last, m, level) == ref[1:]


@needs_ext
def test_overflow_is_flagged():
    seq = GroupSequence((2,), Arithmetic(1))
    j = np.array([60, 1, 60, 2], dtype=np.int64)
    s = np.array([1, 1, 1, 1], dtype=np.int8)
    cps = np.array([4], dtype=np.int64)
    assert compiled.walk_canonical(j, s, a_array(seq), cps)[4]
    assert _fallback.walk_canonical(j, s, a_array(seq), cps)[4]
