"""Compare the compiled kernels with the numpy fallback (and the exact Python walk).

Run with ``python benchmarks/bench_kernels.py``; pass ``--quick`` for smaller sizes.
"""
import argparse
import timeit

import numpy as np

from solenoid_walk import _fallback
from solenoid_walk.distribution import make_distribution, sample_steps
from solenoid_walk.group import GroupSequence
from solenoid_walk.solenoid import haar_sample_batch
from solenoid_walk.walker import walk_exact

try:
    from solenoid_walk import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat=5):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    points, steps, exact_steps = (20_000, 100_000, 10_000) if args.quick else (200_000, 1_000_000, 100_000)

    rng = np.random.default_rng(0)
    seq = GroupSequence((2,))
    dist = make_distribution({"family": "geometric", "r": "1/2"}, seq)
    B = haar_sample_batch(seq, 40, points, rng)
    q = np.ascontiguousarray(dist.weights[:40])
    j, s, _ = sample_steps(dist, rng, steps)
    a = np.array(seq.prefix(seq.depth_cap), dtype=np.int64)
    cps = np.array([steps], dtype=np.int64)

    rows = [("cos_deficit", f"{points} x 40", "numpy", best_of(lambda: _fallback.cos_deficit(B, q)))]
    if _kernels:
        rows.append(("cos_deficit", f"{points} x 40", "compiled", best_of(lambda: _kernels.cos_deficit(B, q))))
    rows.append(("walk_canonical", f"{steps} steps", "numpy", best_of(lambda: _fallback.walk_canonical(j, s, a, cps))))
    if _kernels:
        rows.append(("walk_canonical", f"{steps} steps", "compiled",
                     best_of(lambda: _kernels.walk_canonical(j, s, a, cps))))
    je, se = j[:exact_steps], s[:exact_steps]
    ce = np.array([exact_steps], dtype=np.int64)
    rows.append(("walk_exact", f"{exact_steps} steps", "python ints", best_of(lambda: walk_exact(je, se, seq, ce), 1)))

    print(f"{'kernel':<16}{'size':<18}{'backend':<14}{'seconds':>10}")
    for name, size, backend, t in rows:
        print(f"{name:<16}{size:<18}{backend:<14}{t:>10.4f}")


if __name__ == "__main__":
    main()
