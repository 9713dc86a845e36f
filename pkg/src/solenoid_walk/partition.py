"""The partition E_0, E_1, ... of the solenoid by the first escaping coordinate.

E_n holds the points whose angles b_1..b_n sit in the shrinking central
intervals |b_k| <= pi/(a_1...a_k) while b_{n+1} leaves its own central
interval.  Its Haar measure is (a_{n+1} - 1)/(a_1...a_{n+1}), and the measures
telescope to 1.  Intervals are closed, so a point on a central-interval
boundary counts as central (boundaries have measure zero).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .distribution import StepDistribution
from .group import DepthExceededError, GroupSequence
from .solenoid import TWO_PI, SolenoidPoint, reduce_angle, refine

RESIDUAL = -1
ALPHA_CEILING = 1 - 1e-6


class ContractViolation(ValueError):
    """A point handed to a cell-level operation does not lie in that cell."""


@dataclass(frozen=True)
class PartitionCell:
    index: int
    measure: Fraction
    intervals: dict[int, list[tuple[Fraction, Fraction]]]


@dataclass(frozen=True)
class AlphaCell:
    index: int
    alpha: float
    measure: float


def _need(seq: GroupSequence, n: int) -> None:
    if n + 1 > seq.depth_cap:
        raise DepthExceededError(f"cell {n} needs a_{n + 1}, beyond depth_cap={seq.depth_cap}")


def cell_measure(seq: GroupSequence, n: int) -> Fraction:
    """m(E_n) = (a_{n+1} - 1)/(a_1...a_{n+1}), exactly."""
    _need(seq, n)
    return Fraction(seq.a(n + 1) - 1, seq.product(n + 1))


def telescoping_check(seq: GroupSequence, N: int) -> Fraction:
    """sum_{n<=N} m(E_n), verified to equal 1 - 1/(a_1...a_{N+1})."""
    _need(seq, N)
    total = sum((cell_measure(seq, n) for n in range(N + 1)), Fraction(0))
    expected = 1 - Fraction(1, seq.product(N + 1))
    if total != expected:
        raise ArithmeticError(f"telescoping failed: {total} != {expected}")
    return total


def alpha_cell(seq: GroupSequence, n: int, alpha: float) -> AlphaCell:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return AlphaCell(n, alpha, alpha * float(cell_measure(seq, n)))


def default_alpha(dist: StepDistribution, n: int) -> float:
    """sqrt(Q_n), the maximiser of x/(x^2 + Q_n), kept strictly below 1."""
    return min(ALPHA_CEILING, math.sqrt(dist.tail(n)))


def _central_bounds(seq: GroupSequence, J: int) -> np.ndarray:
    return np.array([math.pi / float(seq.product(k)) for k in range(1, J + 1)])


def classify_batch(seq: GroupSequence, B: np.ndarray) -> np.ndarray:
    """Cell index of each row (RESIDUAL if no coordinate escapes within the depth)."""
    B = np.atleast_2d(B)
    J = B.shape[1]
    outside = np.abs(B) > _central_bounds(seq, J)[None, :]
    first = np.argmax(outside, axis=1)
    return np.where(outside.any(axis=1), first, RESIDUAL)


def classify_point(point: SolenoidPoint, seq: GroupSequence) -> Optional[int]:
    """Smallest n with b_{n+1} outside [-pi/(a_1...a_{n+1}), pi/(a_1...a_{n+1})], or None."""
    if point.depth < 1:
        raise ValueError("point depth must be at least 1")
    n = int(classify_batch(seq, point.array()[None, :])[0])
    return None if n == RESIDUAL else n


def sample_in_cell_batch(seq: GroupSequence, n: int, depth: int, size: int,
                         rng: np.random.Generator, v: Optional[np.ndarray] = None) -> np.ndarray:
    """Haar points conditioned on E_n.

    A single uniform ``v`` per point picks b_{n+1} uniformly on the union of
    the a_{n+1} - 1 escaping intervals (which interval, and where inside it);
    b_1..b_n follow by compatibility and the coordinates above n+1 by
    conditional Haar refinement.  Passing ``v`` lets callers stratify it.
    """
    if depth < n + 1:
        raise ValueError("depth must be at least n + 1")
    _need(seq, n)
    if depth > seq.depth_cap:
        raise DepthExceededError(f"depth {depth} exceeds depth_cap={seq.depth_cap}")
    if v is None:
        v = rng.random(size)
    a_next = seq.a(n + 1)
    a1 = seq.a(1)
    scaled = np.asarray(v) * (a_next - 1)
    k = np.minimum(np.floor(scaled), a_next - 2) + 1
    frac = scaled - (k - 1)
    # x is the b_1 coordinate a point of E_n would have (n >= 1); uniform on the central arc
    x = (2.0 * frac - 1.0) * (math.pi / a1)
    B = np.empty((len(x), n + 1))
    for m in range(1, n + 1):
        B[:, m - 1] = x / float(seq.product(m) // a1)
    B[:, n] = reduce_angle(TWO_PI * k / a_next + x / float(seq.product(n + 1) // a1))
    return refine(seq, B, depth, rng)


def sample_in_cell(seq: GroupSequence, n: int, depth: int, rng: np.random.Generator) -> SolenoidPoint:
    return SolenoidPoint.from_array(sample_in_cell_batch(seq, n, depth, 1, rng)[0])


def lattice_offset(seq: GroupSequence, n: int, B: np.ndarray) -> np.ndarray:
    """Distance of b_{n+1} from the nearest lattice point 2 pi k / a_{n+1}."""
    a_next = seq.a(n + 1)
    b = B[:, n]
    return np.abs(reduce_angle(b - TWO_PI * np.rint(b * a_next / TWO_PI) / a_next))


def alpha_mask(seq: GroupSequence, n: int, alpha: float, B: np.ndarray) -> np.ndarray:
    """Membership in A_n for rows already known to lie in E_n."""
    bound = math.pi * alpha / float(seq.product(n + 1))
    return lattice_offset(seq, n, B) < bound


def alpha_membership(point: SolenoidPoint, seq: GroupSequence, n: int, alpha: float) -> bool:
    """Whether a point of E_n lies in A_n, i.e. |b_1| < pi alpha / a_1."""
    if classify_point(point, seq) != n:
        raise ContractViolation(f"point is not in E_{n}")
    return bool(alpha_mask(seq, n, alpha, point.array()[None, :])[0])


# -- interval families (plot data) ----------------------------------------------

def _wrap(intervals):
    """Bring [lo, hi] (units of pi) into [-1, 1], splitting across the seam, and merge."""
    out = []
    for lo, hi in intervals:
        shift = 2 * math.floor((lo + 1) / 2)
        lo, hi = lo - shift, hi - shift
        if hi > 1:
            out.append((lo, Fraction(1)))
            out.append((Fraction(-1), hi - 2))
        else:
            out.append((lo, hi))
    out.sort()
    merged: list[tuple[Fraction, Fraction]] = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _preimages(D, a: int):
    return _wrap([((lo + 2 * i) / a, (hi + 2 * i) / a) for lo, hi in D for i in range(a)])


def emit_interval_family(seq: GroupSequence, n: int, max_coord: int, region: str = "cell"):
    """Domains of b_1..b_{max_coord}, in units of pi, for E_n or for what remains after it.

    ``region="cell"`` describes E_n; ``region="remainder"`` describes
    Y minus (E_0 u ... u E_n).  Each coordinate maps to a sorted list of
    closed intervals [lo, hi] with exact rational endpoints.
    """
    if max_coord > seq.depth_cap:
        raise DepthExceededError(f"max_coord {max_coord} exceeds depth_cap={seq.depth_cap}")
    if region not in ("cell", "remainder"):
        raise ValueError("region must be 'cell' or 'remainder'")
    _need(seq, n)
    fam: dict[int, list[tuple[Fraction, Fraction]]] = {}
    D: list[tuple[Fraction, Fraction]] = []
    for k in range(1, max_coord + 1):
        c = Fraction(1, seq.product(k))
        a_k = seq.a(k)
        if k <= n or (k == n + 1 and region == "remainder"):
            D = [(-c, c)]
        elif k == n + 1:
            D = _wrap([(Fraction(2 * i, a_k) - c, Fraction(2 * i, a_k) + c) for i in range(1, a_k)])
        else:
            D = _preimages(D, a_k)
        fam[k] = list(D)
    return fam


def interval_family_json(fam) -> dict:
    return {str(k): [[str(lo), str(hi)] for lo, hi in iv] for k, iv in fam.items()}


def interval_family_csv(fam) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["coordinate", "lo_over_pi", "hi_over_pi", "lo", "hi"])
    for k, iv in fam.items():
        for lo, hi in iv:
            w.writerow([k, str(lo), str(hi), repr(float(lo) * math.pi), repr(float(hi) * math.pi)])
    return buf.getvalue()


def make_cell(seq: GroupSequence, n: int) -> PartitionCell:
    return PartitionCell(n, cell_measure(seq, n), emit_interval_family(seq, n, n + 1))
