"""Symmetric step laws mu{e_{+-j}} = q_j / 2 on H_a.

Every law keeps its tails Q_n = q_n + q_{n+1} + ... in a table up to
``depth_cap + 1``.  For the closed-form families those tails come from a
formula, never from ``1 - (q_0 + ... + q_{n-1})``: the series criteria divide
by ``sqrt(Q_n)`` and cancellation there would decide convergence wrongly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Union

import numpy as np
from scipy import special

from .asymptotics import GrowthLaw, Rate, product_law, tail_law
from .group import DepthExceededError, GroupSequence

NORMALIZATION_TOL = 1e-12


class DistributionError(ValueError):
    """Invalid family parameters (non-normalizable, negative weights, ...)."""


@dataclass(frozen=True)
class Geometric:
    r: Fraction


@dataclass(frozen=True)
class SolenoidMatched:
    """q_j proportional to (j+1)**tilt / (a_1...a_j)**kappa."""

    kappa: Fraction
    tilt: Fraction = Fraction(0)


@dataclass(frozen=True)
class PowerLaw:
    """q_j proportional to (j+1)**(-s)."""

    s: Fraction


@dataclass(frozen=True)
class FiniteSupport:
    table: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class CustomTable:
    """An explicit table q_0..q_K, read as a truncation of an unknown infinite law.

    ``tail_law`` / ``weight_law`` optionally declare the growth class of
    Q_n / q_n for the infinite law; without them the classifier stays
    Inconclusive.
    """

    table: tuple[float, ...]
    tail_law: Optional[GrowthLaw] = None
    weight_law: Optional[GrowthLaw] = None


Family = Union[Geometric, SolenoidMatched, PowerLaw, FiniteSupport, CustomTable]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


def _inv_pow(P: int, kappa: float) -> float:
    """P**(-kappa) for a possibly huge exact integer P."""
    if P < 10**300:
        return float(P) ** (-kappa)
    return math.exp(-kappa * math.log(P))


def family_from_dict(d: Mapping) -> Family:
    kind = d.get("family")
    if kind == "geometric":
        return Geometric(_frac(d["r"]))
    if kind == "solenoid_matched":
        return SolenoidMatched(_frac(d["kappa"]), _frac(d.get("tilt", 0)))
    if kind == "power_law":
        return PowerLaw(_frac(d["s"]))
    if kind == "finite_support":
        return FiniteSupport(tuple(sorted((int(k), float(v)) for k, v in d["table"].items())))
    if kind == "custom_table":
        tl = d.get("tail_law")
        wl = d.get("weight_law")
        return CustomTable(
            tuple(float(x) for x in d["table"]),
            GrowthLaw.from_dict(tl) if tl is not None else None,
            GrowthLaw.from_dict(wl) if wl is not None else None,
        )
    raise DistributionError(f"unknown distribution family {kind!r}")


def family_to_dict(f: Family) -> dict:
    if isinstance(f, Geometric):
        return {"family": "geometric", "r": str(f.r)}
    if isinstance(f, SolenoidMatched):
        return {"family": "solenoid_matched", "kappa": str(f.kappa), "tilt": str(f.tilt)}
    if isinstance(f, PowerLaw):
        return {"family": "power_law", "s": str(f.s)}
    if isinstance(f, FiniteSupport):
        return {"family": "finite_support", "table": {str(k): v for k, v in f.table}}
    out = {"family": "custom_table", "table": list(f.table)}
    if f.tail_law is not None:
        out["tail_law"] = f.tail_law.to_dict()
    if f.weight_law is not None:
        out["weight_law"] = f.weight_law.to_dict()
    return out


@dataclass(frozen=True)
class StepDistribution:
    """A step law on H_a with weights and tails tabulated to depth_cap + 1.

    ``weights[j] = q_j`` for ``j <= depth_cap`` and ``tails[n] = Q_n`` for
    ``n <= depth_cap + 1``; mass at indices beyond depth_cap is ``tails[-1]``.
    """

    family: Family
    seq: GroupSequence
    weights: np.ndarray = field(repr=False)
    tails: np.ndarray = field(repr=False)
    positive: bool = True
    finite_support: bool = False
    closed_form: bool = True

    def q(self, j: int) -> float:
        if j <= self.seq.depth_cap:
            return float(self.weights[j])
        return _weight(self.family, self.seq, j)

    def tail(self, n: int) -> float:
        return tail(self, n)

    @property
    def max_index(self) -> Optional[int]:
        """Largest index with positive weight, or None for infinite support."""
        if isinstance(self.family, FiniteSupport):
            return max(j for j, w in self.family.table if w > 0)
        if isinstance(self.family, CustomTable):
            return max(j for j, w in enumerate(self.family.table) if w > 0)
        return None

    def weight_growth(self) -> Optional[GrowthLaw]:
        """Growth class of q_n, if known; None for finite or undeclared laws."""
        f = self.family
        if isinstance(f, Geometric):
            return GrowthLaw.make(0, Rate.of(f.r), 0)
        if isinstance(f, SolenoidMatched):
            return (product_law(self.seq) ** -f.kappa) * GrowthLaw.make(0, None, f.tilt)
        if isinstance(f, PowerLaw):
            return GrowthLaw.make(0, None, -f.s)
        if isinstance(f, CustomTable):
            return f.weight_law
        return None

    def tail_growth(self) -> Optional[GrowthLaw]:
        f = self.family
        if isinstance(f, CustomTable):
            if f.tail_law is not None:
                return f.tail_law
            return tail_law(f.weight_law) if f.weight_law is not None else None
        w = self.weight_growth()
        return tail_law(w) if w is not None else None


# -- weights and tails per family -------------------------------------------------

def _solenoid_rel_sum(seq: GroupSequence, n: int, kappa: float, tilt: float) -> float:
    """sum_{i>=0} ((n+i+1)/(n+1))**tilt * (a_{n+1}...a_{n+i})**(-kappa), summed to double precision."""
    terms = [1.0]
    ratio = 1.0
    i = 0
    while True:
        i += 1
        ratio *= float(seq.rule(n + i)) ** (-kappa)
        t = ratio * ((n + i + 1) / (n + 1)) ** tilt
        terms.append(t)
        if t < 1e-18 * terms[0] or i > 200_000:
            break
    return math.fsum(reversed(terms))


def _solenoid_closed_tail(seq: GroupSequence, n: int, kappa: float) -> float:
    """sum_{j>=n} P_j**(-kappa) in closed form for eventually periodic a (tilt 0)."""
    pre = seq.preperiod
    if n < pre:
        head = math.fsum(_inv_pow(seq.product_unchecked(j), kappa) for j in range(n, pre))
        return head + _solenoid_closed_tail(seq, pre, kappa)
    period = seq.period
    L = len(period)
    Pi = math.prod(period)
    num = 0.0
    run = 1.0
    for i in range(L):
        if i:
            run *= float(seq.rule(n + i)) ** (-kappa)
        num += run
    return _inv_pow(seq.product_unchecked(n), kappa) * num / (1.0 - float(Pi) ** (-kappa))


def _solenoid_unnormalized_tail(seq, n, f: SolenoidMatched) -> float:
    kappa, tilt = float(f.kappa), float(f.tilt)
    if tilt == 0 and seq.is_eventually_periodic:
        return _solenoid_closed_tail(seq, n, kappa)
    return (n + 1) ** tilt * _inv_pow(seq.product_unchecked(n), kappa) * _solenoid_rel_sum(seq, n, kappa, tilt)


def _weight(f: Family, seq: GroupSequence, j: int) -> float:
    if isinstance(f, Geometric):
        r = float(f.r)
        return (1 - r) * r ** j
    if isinstance(f, SolenoidMatched):
        norm = _solenoid_unnormalized_tail(seq, 0, f)
        return (j + 1) ** float(f.tilt) * _inv_pow(seq.product_unchecked(j), float(f.kappa)) / norm
    if isinstance(f, PowerLaw):
        s = float(f.s)
        return (j + 1) ** (-s) / special.zeta(s, 1)
    if isinstance(f, FiniteSupport):
        total = math.fsum(w for _, w in f.table)
        return math.fsum(w for k, w in f.table if k == j) / total
    total = math.fsum(f.table)
    return f.table[j] / total if j < len(f.table) else 0.0


def _closed_tail(f: Family, seq: GroupSequence, n: int) -> float:
    if isinstance(f, Geometric):
        return float(f.r) ** n
    if isinstance(f, SolenoidMatched):
        return _solenoid_unnormalized_tail(seq, n, f) / _solenoid_unnormalized_tail(seq, 0, f)
    if isinstance(f, PowerLaw):
        s = float(f.s)
        return float(special.zeta(s, n + 1) / special.zeta(s, 1))
    raise TypeError(f"{type(f).__name__} has no closed-form tail")


def _validate(f: Family, seq: GroupSequence) -> None:
    if isinstance(f, Geometric):
        if not 0 < f.r < 1:
            raise DistributionError(f"geometric ratio must lie in (0, 1), got {f.r}")
    elif isinstance(f, SolenoidMatched):
        if f.kappa <= 0:
            raise DistributionError(f"kappa must be positive, got {f.kappa}")
        try:
            tail_law(product_law(seq) ** -f.kappa * GrowthLaw.make(0, None, f.tilt))
        except ValueError as exc:
            raise DistributionError(str(exc)) from None
    elif isinstance(f, PowerLaw):
        if f.s <= 1:
            raise DistributionError(f"power-law exponent must exceed 1, got {f.s}")
    else:
        if isinstance(f, FiniteSupport):
            items = list(f.table)
        else:
            items = list(enumerate(f.table))
        if not items:
            raise DistributionError("empty weight table")
        if any(w < 0 for _, w in items):
            raise DistributionError("negative weight in table")
        if any(j < 0 for j, _ in items):
            raise DistributionError("negative index in table")
        total = math.fsum(w for _, w in items)
        if total <= 0 or total > 1 + NORMALIZATION_TOL:
            raise DistributionError(f"table weights must sum to a value in (0, 1], got {total}")
        top = max(j for j, w in items if w > 0)
        if top > seq.depth_cap:
            raise DepthExceededError(f"table index {top} exceeds depth_cap={seq.depth_cap}")


def make_distribution(spec: Union[Family, Mapping], seq: GroupSequence) -> StepDistribution:
    """Build the step law of ``spec`` (a family or its dict descriptor) on ``seq``."""
    f = spec if not isinstance(spec, Mapping) else family_from_dict(spec)
    _validate(f, seq)
    cap = seq.depth_cap
    closed = isinstance(f, (Geometric, SolenoidMatched, PowerLaw))
    if closed:
        tails = np.array([_closed_tail(f, seq, n) for n in range(cap + 2)])
        if isinstance(f, Geometric):
            r = float(f.r)
            weights = np.array([(1 - r) * r ** j for j in range(cap + 1)])
        else:
            weights = np.array([_weight(f, seq, j) for j in range(cap + 1)])
        positive, finite = True, False
    else:
        dense = np.zeros(cap + 1)
        if isinstance(f, FiniteSupport):
            for j, w in f.table:
                dense[j] += w
        else:
            dense[: len(f.table)] = f.table
        dense /= math.fsum(dense)
        weights = dense
        # smallest-first accumulation from the far end
        tails = np.zeros(cap + 2)
        acc: list[float] = []
        for n in range(cap, -1, -1):
            acc.append(dense[n])
            tails[n] = math.fsum(acc)
        tails[0] = 1.0
        finite = isinstance(f, FiniteSupport)
        positive = (
            isinstance(f, CustomTable)
            and bool(np.all(np.asarray(f.table) > 0))
            and (f.weight_law is not None or f.tail_law is not None)
        )
    weights.setflags(write=False)
    tails.setflags(write=False)
    return StepDistribution(f, seq, weights, tails, positive, finite, closed)


def tail(dist: StepDistribution, n: int) -> float:
    """Q_n = q_n + q_{n+1} + ..."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n < len(dist.tails):
        return float(dist.tails[n])
    if dist.closed_form:
        return _closed_tail(dist.family, dist.seq, n)
    return 0.0


# -- sampling ---------------------------------------------------------------------

def _index_from_uniform(dist: StepDistribution, w: np.ndarray) -> np.ndarray:
    """Inverse CDF on the index: j = min{J : Q_{J+1} < w} for w in (0, 1].

    Returns depth_cap + 1 for draws that land beyond the cap.
    """
    neg_tails = -np.asarray(dist.tails[1:])
    return np.searchsorted(neg_tails, -w, side="right")


def sample_indices(dist: StepDistribution, rng: np.random.Generator, size: int):
    """Draw ``size`` indices j with P(j) = q_j; beyond-cap draws are redrawn.

    Returns ``(indices, redraws)``.
    """
    cap = dist.seq.depth_cap
    j = _index_from_uniform(dist, 1.0 - rng.random(size))
    redraws = 0
    bad = np.flatnonzero(j > cap)
    while bad.size:
        redraws += int(bad.size)
        j[bad] = _index_from_uniform(dist, 1.0 - rng.random(bad.size))
        bad = bad[j[bad] > cap]
    return j.astype(np.int64), redraws


def sample_steps(dist: StepDistribution, rng: np.random.Generator, size: int):
    """Draw ``size`` steps as (indices, signs, redraws); signs are +-1 independent of j."""
    j, redraws = sample_indices(dist, rng, size)
    signs = np.where(rng.random(size) < 0.5, -1, 1).astype(np.int8)
    return j, signs, redraws


def sample_step(dist: StepDistribution, rng: np.random.Generator) -> tuple[int, int]:
    j, s, _ = sample_steps(dist, rng, 1)
    return int(j[0]), int(s[0])
