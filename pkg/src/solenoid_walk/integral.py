"""Stratified Monte Carlo for the integral of 1/(1 - mu_hat) over the solenoid.

The walk is recurrent exactly when this integral diverges.  It is estimated
cell by cell over the partition E_0, E_1, ..., E_N; the leftover central set
(which contains y = 0, where the integrand is singular) is never sampled and
only its measure is reported, plus an upper bound when the law admits one.

Also here: checks of the inequalities used to bound the integral from below
(recurrence side) and above (transience side), with every constant given an
explicit value.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .distribution import StepDistribution
from .group import GroupSequence
from .partition import (
    alpha_mask,
    cell_measure,
    classify_batch,
    default_alpha,
    sample_in_cell_batch,
)
from .solenoid import deficits, haar_sample_batch


def cell_rng(seed: int, n: int) -> np.random.Generator:
    """Independent stream for cell n; results do not depend on the worker count."""
    return np.random.default_rng([seed, n])


@dataclass
class CellEstimate:
    n: int
    measure: float
    estimate: float
    stderr: float
    samples: int
    systematic_lo: float
    systematic_hi: float
    unstable: bool = False


@dataclass
class IntegralEstimate:
    cells: list[CellEstimate]
    partial_totals: list[float]
    partial_total: float
    residual_measure: str
    residual_bound: Optional[float]
    residual_note: str
    depth: int
    diverging: bool
    growth_slope: float
    late_to_overall_increment: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cells"] = [asdict(c) for c in self.cells]
        return d


@dataclass
class BoundCheckReport:
    inequality: str
    samples: int
    violations: int
    worst_margin: float
    constants: dict = field(default_factory=dict)
    derivation: list[str] = field(default_factory=list)
    applicable: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def _stratified_uniforms(size: int, rng: np.random.Generator) -> np.ndarray:
    """Two jittered uniforms in each of size//2 equal strata of [0, 1)."""
    H = max(size // 2, 1)
    base = np.repeat(np.arange(H), 2)
    return (base + rng.random(2 * H)) / H


def _stratified_mean(values: np.ndarray) -> tuple[float, float]:
    """Mean and standard error for values laid out as consecutive stratum pairs."""
    pairs = values.reshape(-1, 2)
    H = pairs.shape[0]
    mean = float(values.mean())
    s2 = 0.5 * (pairs[:, 0] - pairs[:, 1]) ** 2  # unbiased within-stratum variance
    return mean, float(math.sqrt(s2.sum() / (2.0 * H * H)))


def estimate_cell_integral(seq: GroupSequence, dist: StepDistribution, n: int, samples: int,
                           depth: int, rng: np.random.Generator, stratified: bool = True) -> CellEstimate:
    """Estimate the integral of 1/(1 - mu_hat) over E_n.

    The uniform that places b_{n+1} is stratified (pairs of jittered draws per
    stratum) unless ``stratified=False``.  The systematic band re-evaluates
    the mean with mu_hat shifted by the truncation bound 2 Q_J either way.
    """
    if depth < n + 2:
        raise ValueError("depth must be at least n + 2")
    v = _stratified_uniforms(samples, rng) if stratified else rng.random(samples)
    B = sample_in_cell_batch(seq, n, depth, len(v), rng, v=v)
    QJ = dist.tail(depth)
    bound = 2.0 * QJ
    one_minus = deficits(dist, B) + QJ  # 1 - (truncated mu_hat)
    f = 1.0 / one_minus
    m = float(cell_measure(seq, n))
    if stratified:
        mean, se = _stratified_mean(f)
    else:
        mean, se = float(f.mean()), float(f.std(ddof=1) / math.sqrt(len(f)))
    lo = m * float(np.mean(1.0 / (one_minus + bound)))
    unstable = bool(np.any(one_minus - bound <= 0))
    hi = math.inf if unstable else m * float(np.mean(1.0 / (one_minus - bound)))
    return CellEstimate(n, m, m * mean, m * se, len(f), lo, hi, unstable)


def _growth_diagnostics(increments: list[float], threshold: float) -> tuple[bool, float, float]:
    N = len(increments)
    if N < 2:
        return False, 0.0, 0.0
    window = max(4, (N + 1) // 2)
    window = min(window, N)
    late = increments[-window:]
    overall = float(np.mean(increments))
    ratio = float(np.mean(late)) / overall if overall > 0 else 0.0
    xs = np.arange(N - window, N)
    totals = np.cumsum(increments)[-window:]
    slope = float(np.polyfit(xs, totals, 1)[0]) if window >= 2 else 0.0
    return ratio >= threshold, slope, ratio


def estimate_total(seq: GroupSequence, dist: StepDistribution, n_cells: int, samples_per_cell: int,
                   depth: int, seed: int, workers: int = 1, growth_threshold: float = 0.5,
                   stratified: bool = True) -> IntegralEstimate:
    """Sum the cell estimates for n = 0..n_cells.

    ``diverging`` is a heuristic only: it is set when the mean increment over
    the last max(4, half) cells is at least ``growth_threshold`` times the mean
    increment over all cells, i.e. the partial totals keep growing linearly
    instead of levelling off.
    """
    if n_cells + 2 > depth:
        raise ValueError("need n_cells + 2 <= depth")

    def one(n: int) -> CellEstimate:
        return estimate_cell_integral(seq, dist, n, samples_per_cell, depth, cell_rng(seed, n), stratified)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            cells = list(ex.map(one, range(n_cells + 1)))
    else:
        cells = [one(n) for n in range(n_cells + 1)]
    incs = [c.estimate for c in cells]
    totals = [float(x) for x in np.cumsum(incs)]
    diverging, slope, ratio = _growth_diagnostics(incs, growth_threshold)
    P = seq.product(n_cells + 1)
    res_bound: Optional[float] = None
    note = "unbounded-unknown: the residual set contains y = 0"
    if dist.positive and not diverging:
        ub = residual_majorant(seq, dist, n_cells + 1)
        if ub is not None:
            res_bound = ub
            note = (f"majorant sum over cells {n_cells + 1}..{seq.depth_cap - 1} "
                    "plus a geometric extrapolation beyond depth_cap")
    return IntegralEstimate(cells, totals, totals[-1], f"1/{P}", res_bound, note, depth,
                            diverging, slope, ratio)


# -- inequality checks ------------------------------------------------------------

def bound_check_cosine(grid_size: int) -> BoundCheckReport:
    """2 t^2/pi^2 <= 1 - cos t <= t^2/2 on a uniform grid of [0, pi/2]."""
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    t = np.linspace(0.0, math.pi / 2, grid_size)
    one_minus_cos = 2.0 * np.sin(t / 2) ** 2
    lower = 2.0 * t * t / math.pi**2
    upper = t * t / 2.0
    lo_margin = one_minus_cos - lower
    hi_margin = upper - one_minus_cos
    violations = int(np.sum(lo_margin < 0) + np.sum(hi_margin < 0))
    return BoundCheckReport("cosine: 2t^2/pi^2 <= 1-cos t <= t^2/2", grid_size, violations,
                            float(min(lo_margin.min(), hi_margin.min())))


def majorant_constants(dist: StepDistribution) -> dict:
    q0 = dist.q(0)
    return {"C3": 2.0 * q0 / math.pi**2, "C4": 2.0}


MAJORANT_DERIVATION = [
    "mu_hat(y) <= 1 - sum_{j<=n} q_j (1 - cos b_{j+1}) since every dropped term is <= q_j",
    "keep j = 0: for y in E_n, b_1 = a_2...a_n b_n = t~ with |t~| <= pi/a_1 <= pi/2, "
    "so 1 - cos t~ >= 2 t~^2 / pi^2; hence C3 = 2 q_0 / pi^2",
    "keep j = n: b_{n+1} lies within pi/(a_1...a_{n+1}) of 2 pi k/a_{n+1}, k != 0, "
    "so 1 - cos b_{n+1} >= 2 / a_{n+1}^2; hence C4 = 2",
    "1 - x <= exp(-x) turns the bound into mu_hat <= exp(-C3 t~^2 - C4 q_n / a_{n+1}^2)",
]


def bound_check_majorant(seq: GroupSequence, dist: StepDistribution, n: int, samples: int,
                         rng: np.random.Generator, depth: Optional[int] = None) -> BoundCheckReport:
    """mu_hat(y) <= exp(-C3 t~^2 - C4 q_n / a_{n+1}^2) on samples from E_n.

    The left side is taken at the top of its truncation band: since every
    omitted term q_j (1 - cos b_{j+1}) is nonnegative, mu_hat <= 1 - (partial deficit).
    """
    consts = majorant_constants(dist)
    label = "majorant: mu_hat <= exp(-C3 t~^2 - C4 q_n/a_{n+1}^2)"
    if n < 1:
        return BoundCheckReport(label, 0, 0, math.nan, consts, MAJORANT_DERIVATION, applicable=False)
    depth = depth or min(seq.depth_cap, n + 24)
    if np.any(dist.weights[:depth] <= 0):
        return BoundCheckReport(label, 0, 0, math.nan, consts, MAJORANT_DERIVATION, applicable=False)
    B = sample_in_cell_batch(seq, n, depth, samples, rng)
    lhs = 1.0 - deficits(dist, B)
    t_tilde = B[:, n - 1] * float(seq.product(n) // seq.a(1))
    rhs = np.exp(-consts["C3"] * t_tilde**2 - consts["C4"] * dist.q(n) / seq.a(n + 1) ** 2)
    margin = rhs - lhs
    return BoundCheckReport(label, samples, int(np.sum(margin < 0)), float(margin.min()),
                            consts, MAJORANT_DERIVATION)


def geometric_series_tail(a: float) -> float:
    """Upper bound sqrt(pi/a) + exp(-a) for sum_{k>=1} exp(-a k)/sqrt(k).

    The first term is exp(-a); the rest is at most the integral of
    exp(-a x)/sqrt(x) over [1, inf), itself at most sqrt(pi/a).
    """
    if a <= 0:
        raise ValueError("a must be positive")
    return math.sqrt(math.pi / a) + math.exp(-a)


def lower_chain_constant(seq: GroupSequence) -> float:
    """C_1 = max(pi^2/a_1^2 * sum_{j>=0} (a_2...a_{j+1})^{-2}, 2).

    The sum runs to depth_cap with the remainder bounded by a geometric tail
    of ratio 1/4 (every a_j >= 2).
    """
    a1 = seq.a(1)
    terms = [1.0]
    prod = 1
    for j in range(2, seq.depth_cap + 1):
        prod *= seq.a(j)
        terms.append(1.0 / float(prod) ** 2)
    S = math.fsum(terms) + terms[-1] / 3.0
    return max(math.pi**2 / a1**2 * S, 2.0)


def cell_lower_bound(seq: GroupSequence, dist: StepDistribution, n: int,
                     alpha: Optional[float] = None) -> Optional[float]:
    """m(A_n) / (C_1 (alpha^2 + Q_n)): a lower bound for the integral over E_n (n >= 1).

    None when Q_n = 0 and no alpha is given (the default alpha would vanish).
    """
    if alpha is None and dist.tail(n) <= 0:
        return None
    alpha = default_alpha(dist, n) if alpha is None else alpha
    C1 = lower_chain_constant(seq)
    return alpha * float(cell_measure(seq, n)) / (C1 * (alpha**2 + dist.tail(n)))


def bound_check_lower_chain(seq: GroupSequence, dist: StepDistribution, n: int, samples: int,
                            rng: np.random.Generator, depth: Optional[int] = None,
                            alpha: Optional[float] = None) -> BoundCheckReport:
    """Pointwise 1 - mu_hat <= C_1 (alpha^2 + Q_n) on A_n, and the integral over A_n >= m(A_n)/(C_1(alpha^2+Q_n)).

    The truncated point carries 1 - mu_hat <= partial deficit + 2 Q_J.  The
    aggregate check allows three standard errors.
    """
    alpha = default_alpha(dist, n) if alpha is None else alpha
    C1 = lower_chain_constant(seq)
    depth = depth or min(seq.depth_cap, n + 24)
    label = "lower chain: 1 - mu_hat <= C1 (alpha^2 + Q_n) on A_n"
    B = sample_in_cell_batch(seq, n, depth, samples, rng)
    inA = alpha_mask(seq, n, alpha, B)
    upper = deficits(dist, B[inA]) + 2.0 * dist.tail(depth)
    cap = C1 * (alpha**2 + dist.tail(n))
    margin = cap - upper
    viol = int(np.sum(margin < 0))
    # integral over A_n, estimated from the same E_n samples
    m = float(cell_measure(seq, n))
    f = np.where(inA, 1.0 / (deficits(dist, B) + dist.tail(depth)), 0.0)
    est, se = m * float(f.mean()), m * float(f.std(ddof=1)) / math.sqrt(samples)
    L = cell_lower_bound(seq, dist, n, alpha)
    if est + 3 * se < L:
        viol += 1
    return BoundCheckReport(label, samples, viol, float(margin.min()) if margin.size else math.nan,
                            {"C1": C1, "alpha": alpha, "A_n_integral": est, "A_n_stderr": se,
                             "lower_bound": L},
                            ["for j < n: |b_{j+1}| < pi alpha/(a_1...a_{j+1}) and 1 - cos t <= t^2/2 <= t^2",
                             "for j >= n: 1 - cos b_{j+1} <= 2",
                             "q_j <= 1, so 1 - mu_hat <= (pi^2 alpha^2/a_1^2) S + 2 Q_n <= C1 (alpha^2 + Q_n)"])


def cell_upper_bound(seq: GroupSequence, dist: StepDistribution, n: int) -> dict:
    """Upper bounds for the integral over E_n (n >= 1) from the majorant.

    ``quadrature``: m(E_n) * average over t~ of 1/(1 - exp(-C3 t~^2 - c));
    ``chain``: m(E_n) (1 + a_1 G(c) / (2 sqrt(pi C3))), with G the bound of
    :func:`geometric_series_tail` and c = C4 q_n / a_{n+1}^2.
    """
    consts = majorant_constants(dist)
    C3, C4 = consts["C3"], consts["C4"]
    a1 = seq.a(1)
    c = C4 * dist.q(n) / seq.a(n + 1) ** 2
    m = float(cell_measure(seq, n))
    half = math.pi / a1

    def g(x):
        return 1.0 / -math.expm1(-C3 * x * x - c)

    val, _ = integrate.quad(g, 0.0, half, points=[min(half, math.sqrt(c / C3))], limit=200)
    quad_bound = m * (2 * val) / (2 * half)
    chain = m * (1.0 + a1 * geometric_series_tail(c) / (2.0 * math.sqrt(math.pi * C3)))
    return {"quadrature": quad_bound, "chain": chain, "c": c, **consts}


def residual_majorant(seq: GroupSequence, dist: StepDistribution, start: int) -> Optional[float]:
    """Sum of the quadrature upper bounds over cells start..depth_cap-1, plus a geometric tail estimate.

    The bounds are analytic, so they do not depend on the sampling depth.
    """
    if start < 1 or start >= seq.depth_cap - 1 or not dist.positive:
        return None
    vals = [cell_upper_bound(seq, dist, n)["quadrature"] for n in range(start, seq.depth_cap)]
    if len(vals) < 5:
        return None
    # extrapolate only when the last few bounds shrink at a clearly geometric rate
    r = max(vals[i] / vals[i - 1] for i in range(len(vals) - 4, len(vals)))
    if r > 0.999:
        return None
    return math.fsum(vals) + vals[-1] * r / (1 - r)


def estimate_direct(seq: GroupSequence, dist: StepDistribution, n_cells: int, samples: int,
                    depth: int, rng: np.random.Generator) -> tuple[float, float]:
    """Plain Haar sampling of the integral over E_0 u ... u E_{n_cells} (no stratification)."""
    B = haar_sample_batch(seq, depth, samples, rng)
    idx = classify_batch(seq, B)
    keep = (idx >= 0) & (idx <= n_cells)
    f = np.zeros(samples)
    f[keep] = 1.0 / (deficits(dist, B[keep]) + dist.tail(depth))
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples))
