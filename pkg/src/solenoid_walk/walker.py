"""Exact simulation of the walk S_t = xi_1 + ... + xi_t on H_a.

Steps are the generators +-e_j with probability q_j/2 each.  Positions are
kept as canonical (numerator, level) pairs, so a return to zero is an exact
integer test.  The compiled kernel works in int64 and reports overflow; the
trial is then replayed with Python integers from the same sampled steps.

Simulation never decides recurrence.  It only contrasts how mean visits to
zero grow with the horizon for different laws.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .distribution import StepDistribution, sample_steps
from .group import ZERO, GroupSequence, RationalElement, add, canonicalize, generator

FINITE_HORIZON_CAVEAT = (
    "finite-horizon proxy: visit counts up to T cannot establish recurrence or transience; "
    "compare growth of mean visits across horizons and defer to the series classifier"
)
REDRAW_LIMIT = 1e-6
Z_SCORE = 3.0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per trial, so results do not depend on the worker count."""
    return np.random.default_rng([seed, trial])


@dataclass
class WalkSummary:
    horizon: int
    visits: int
    return_times: list[int]
    final: RationalElement
    redraws: int


def run_walk(seq: GroupSequence, dist: StepDistribution, horizon: int,
             rng: np.random.Generator) -> WalkSummary:
    """Reference walk: one exact group addition per step, RationalElement throughout."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    j_idx, signs, redraws = sample_steps(dist, rng, horizon)
    pos = ZERO
    times = []
    for t, (j, s) in enumerate(zip(j_idx.tolist(), signs.tolist()), start=1):
        pos = add(pos, generator(seq, j, s), seq)
        if pos.is_zero:
            times.append(t)
    return WalkSummary(horizon, len(times), times, pos, redraws)


def walk_exact(j_idx: np.ndarray, signs: np.ndarray, seq: GroupSequence, checkpoints: np.ndarray):
    """Python-integer version of ``kernels.walk_canonical`` (never overflows)."""
    m, level = 0, 0
    visits, last, k = 0, 0, 0
    out = np.zeros(len(checkpoints), dtype=np.int64)
    for t, (j, s) in enumerate(zip(j_idx.tolist(), signs.tolist()), start=1):
        if j <= level:
            m += s * (seq.product(level) // seq.product(j))
        else:
            m = m * (seq.product(j) // seq.product(level)) + s
            level = j
        x = canonicalize(m, level, seq)
        m, level = x.numerator, x.level
        if m == 0:
            visits += 1
            last = t
        while k < len(checkpoints) and checkpoints[k] == t:
            out[k] = visits
            k += 1
    out[k:] = visits
    return out, last, m, level


def _a_array(seq: GroupSequence) -> np.ndarray:
    return np.array(seq.prefix(seq.depth_cap), dtype=np.int64)


@dataclass
class TrialResult:
    visits: np.ndarray  # at each checkpoint
    last_return: int
    final_sign: int
    redraws: int
    overflowed: bool


def _one_trial(seq, dist, a_arr, checkpoints, seed, index) -> TrialResult:
    rng = trial_rng(seed, index)
    T = int(checkpoints[-1])
    j_idx, signs, redraws = sample_steps(dist, rng, T)
    visits, last, m, _, overflow = kernels.walk_canonical(j_idx, signs, a_arr, checkpoints)
    if overflow:
        visits, last, m, _ = walk_exact(j_idx, signs, seq, checkpoints)
    return TrialResult(np.asarray(visits, dtype=np.int64), int(last), (m > 0) - (m < 0), redraws, bool(overflow))


def run_trials(seq: GroupSequence, dist: StepDistribution, trials: int, checkpoints: Sequence[int],
               seed: int, workers: int = 1) -> list[TrialResult]:
    cps = np.array(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if trials < 1 or cps.size == 0 or cps[0] < 1:
        raise ValueError("need trials >= 1 and horizons >= 1")
    a_arr = _a_array(seq)

    def one(i):
        return _one_trial(seq, dist, a_arr, cps, seed, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, range(trials)))
    return [one(i) for i in range(trials)]


def wilson_interval(successes: int, n: int, z: float = Z_SCORE) -> tuple[float, float]:
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def mean_interval(x: np.ndarray, z: float = Z_SCORE) -> tuple[float, float, float]:
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, mean - z * se, mean + z * se


def _last_return_histogram(last: np.ndarray) -> list[dict]:
    """Counts of last return times in dyadic bins [2^k, 2^{k+1}); bin 'none' for no return."""
    rows = [{"bin": "none", "count": int(np.sum(last == 0))}]
    hit = last[last > 0]
    if hit.size:
        exps = np.floor(np.log2(hit)).astype(int)
        for k in range(int(exps.max()) + 1):
            rows.append({"bin": f"[{2**k},{2**(k + 1)})", "count": int(np.sum(exps == k))})
    return rows


@dataclass
class HorizonStats:
    horizon: int
    mean_visits: float
    mean_ci: tuple[float, float]
    returned_fraction: float
    returned_ci: tuple[float, float]


@dataclass
class WalkStats:
    trials: int
    horizon: int
    visits_to_zero: list[int]
    returned_fraction: float
    returned_ci: tuple[float, float]
    mean_visits: float
    mean_ci: tuple[float, float]
    last_return_histogram: list[dict]
    curve: list[HorizonStats]
    positive_final: int
    negative_final: int
    redraws: int
    redraw_fraction: float
    valid: bool
    overflow_replays: int
    caveat: str = FINITE_HORIZON_CAVEAT
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _horizon_stats(T: int, visits: np.ndarray) -> HorizonStats:
    mean, lo, hi = mean_interval(visits.astype(float))
    hits = int(np.sum(visits > 0))
    return HorizonStats(T, mean, (lo, hi), hits / len(visits), wilson_interval(hits, len(visits)))


def return_experiment(seq: GroupSequence, dist: StepDistribution, trials: int, horizons: Sequence[int],
                      seed: int, workers: int = 1) -> WalkStats:
    """Run ``trials`` walks to max(horizons) and summarise visits at every horizon.

    The headline fields refer to the largest horizon.  Intervals are 3-sigma:
    Wilson for the returned fraction, mean +- 3 standard errors for visits.
    """
    results = run_trials(seq, dist, trials, horizons, seed, workers)
    cps = sorted(set(int(h) for h in horizons))
    V = np.stack([r.visits for r in results])
    curve = [_horizon_stats(T, V[:, i]) for i, T in enumerate(cps)]
    top = curve[-1]
    redraws = sum(r.redraws for r in results)
    steps = trials * cps[-1]
    frac = redraws / steps
    notes = []
    if dist.finite_support and dist.max_index == 0:
        notes.append("steps are +-1: returns happen only at even times")
    if frac >= REDRAW_LIMIT:
        notes.append(f"redraw fraction {frac:.3g} exceeds {REDRAW_LIMIT}: raise depth_cap")
    finals = np.array([r.final_sign for r in results])
    return WalkStats(
        trials=trials,
        horizon=cps[-1],
        visits_to_zero=[int(v) for v in V[:, -1]],
        returned_fraction=top.returned_fraction,
        returned_ci=top.returned_ci,
        mean_visits=top.mean_visits,
        mean_ci=top.mean_ci,
        last_return_histogram=_last_return_histogram(np.array([r.last_return for r in results])),
        curve=curve,
        positive_final=int(np.sum(finals > 0)),
        negative_final=int(np.sum(finals < 0)),
        redraws=redraws,
        redraw_fraction=frac,
        valid=frac < REDRAW_LIMIT,
        overflow_replays=sum(r.overflowed for r in results),
        notes=notes,
    )


def zero_probability(seq: GroupSequence, dist: StepDistribution, trials: int, times: Sequence[int],
                     seed: int, workers: int = 1) -> dict[int, tuple[float, float]]:
    """Empirical P(S_t = 0) and its standard error for each t in ``times``.

    S_t = 0 exactly when the visit count steps up between t - 1 and t.
    """
    times = sorted(set(int(t) for t in times))
    cps = sorted(set(times) | {t - 1 for t in times if t > 1})
    results = run_trials(seq, dist, trials, cps, seed, workers)
    V = np.stack([r.visits for r in results])
    col = {c: i for i, c in enumerate(cps)}
    out = {}
    for t in times:
        hit = V[:, col[t]] - (V[:, col[t - 1]] if t > 1 else 0)
        p = float(hit.mean())
        out[t] = (p, math.sqrt(p * (1 - p) / trials))
    return out


@dataclass
class ContrastRow:
    horizon: int
    mean_a: float
    ci_a: tuple[float, float]
    mean_b: float
    ci_b: tuple[float, float]
    ratio: Optional[float]


def visit_count_contrast(seq: GroupSequence, dist_a: StepDistribution, dist_b: StepDistribution,
                         trials: int, horizons: Sequence[int], seed: int, workers: int = 1) -> dict:
    """Mean-visit curves for two laws side by side, with the ratio a/b per horizon.

    Both laws use the same seed; their step streams still differ because the
    laws differ.
    """
    from .criteria import classify

    sa = return_experiment(seq, dist_a, trials, horizons, seed, workers)
    sb = return_experiment(seq, dist_b, trials, horizons, seed, workers)
    rows = []
    for ca, cb in zip(sa.curve, sb.curve):
        ratio = ca.mean_visits / cb.mean_visits if cb.mean_visits > 0 else None
        rows.append(ContrastRow(ca.horizon, ca.mean_visits, ca.mean_ci, cb.mean_visits, cb.mean_ci, ratio))
    return {
        "verdict_a": classify(seq, dist_a).verdict.value,
        "verdict_b": classify(seq, dist_b).verdict.value,
        "rows": rows,
        "stats_a": sa,
        "stats_b": sb,
    }


def exact_ssrw_return_probability(n: int) -> float:
    """P(S_{2n} = 0) for the simple random walk on Z: C(2n, n) / 4^n."""
    return math.comb(2 * n, n) / 4**n


def exact_ssrw_visit_distribution(T: int) -> np.ndarray:
    """Law of the number of visits to 0 in [1, T] for the simple random walk on Z.

    Dynamic programming over (position, visits so far).
    """
    size = 2 * T + 1
    dp = np.zeros((size, T + 1))
    dp[T, 0] = 1.0
    for _ in range(T):
        nxt = np.zeros_like(dp)
        nxt[1:, :] += 0.5 * dp[:-1, :]
        nxt[:-1, :] += 0.5 * dp[1:, :]
        # arriving at zero adds a visit
        row = nxt[T].copy()
        nxt[T] = 0.0
        nxt[T, 1:] = row[:-1]
        dp = nxt
    return dp.sum(axis=0)
