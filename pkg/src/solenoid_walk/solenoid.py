"""The dual group of H_a (the a-adic solenoid) as compatible angle sequences.

A point is a sequence (b_1, b_2, ...) of angles in [-pi, pi) with
a_{n+1} b_{n+1} = b_n (mod 2 pi); only the first ``depth`` coordinates are
carried.  The character value of the generator e_{+-j} at the point is
exp(+-i b_{j+1}), so for a symmetric step law the characteristic function is
the real sum  sum_j q_j cos b_{j+1}.

Batches of points are plain ``(N, depth)`` float arrays; :class:`SolenoidPoint`
wraps a single row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distribution import StepDistribution
from .group import DepthExceededError, GroupSequence

TWO_PI = 2.0 * math.pi
COMPAT_TOL = 1e-9
ZERO_ANGLE_TOL = 1e-3


def reduce_angle(x):
    """Reduce to [-pi, pi) with a round-half-to-even remainder."""
    x = np.asarray(x, dtype=np.float64)
    r = x - TWO_PI * np.rint(x / TWO_PI)
    r = np.where(r >= math.pi, r - TWO_PI, r)
    return np.where(r < -math.pi, r + TWO_PI, r)


@dataclass(frozen=True)
class SolenoidPoint:
    angles: tuple[float, ...]

    @classmethod
    def zero(cls, depth: int) -> "SolenoidPoint":
        return cls((0.0,) * depth)

    @classmethod
    def from_array(cls, arr) -> "SolenoidPoint":
        return cls(tuple(float(x) for x in np.asarray(arr).ravel()))

    @property
    def depth(self) -> int:
        return len(self.angles)

    def array(self) -> np.ndarray:
        return np.asarray(self.angles, dtype=np.float64)

    def truncate(self, depth: int) -> "SolenoidPoint":
        return SolenoidPoint(self.angles[:depth])


@dataclass(frozen=True)
class CharValue:
    value: float
    truncation_error_bound: float


def _check_depth(seq: GroupSequence, depth: int) -> None:
    if depth > seq.depth_cap:
        raise DepthExceededError(f"depth {depth} exceeds depth_cap={seq.depth_cap}")
    if depth < 1:
        raise ValueError("depth must be at least 1")


def compatibility_residual(seq: GroupSequence, angles) -> float:
    """max_n |a_{n+1} b_{n+1} - b_n| (mod 2 pi) over a point or a batch."""
    B = np.atleast_2d(np.asarray(angles, dtype=np.float64))
    J = B.shape[1]
    if J < 2:
        return 0.0
    a = np.array(seq.prefix(J), dtype=np.float64)
    res = reduce_angle(a[None, 1:] * B[:, 1:] - B[:, :-1])
    return float(np.max(np.abs(res)))


def refine(seq: GroupSequence, B: np.ndarray, to_depth: int, rng: np.random.Generator) -> np.ndarray:
    """Extend a batch of points by conditional Haar refinement.

    Each new coordinate picks one of the a_{n+1} preimages (b_n + 2 pi k)/a_{n+1}
    uniformly.
    """
    _check_depth(seq, to_depth)
    N, J = B.shape
    if to_depth < J:
        raise ValueError("refine cannot reduce depth")
    out = np.empty((N, to_depth))
    out[:, :J] = B
    for n in range(J, to_depth):
        a_next = seq.a(n + 1)
        k = rng.integers(0, a_next, size=N)
        out[:, n] = reduce_angle((out[:, n - 1] + TWO_PI * k) / a_next)
    return out


def haar_sample_batch(seq: GroupSequence, depth: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-distributed points of the solenoid, first ``depth`` coordinates.

    b_1 is uniform on the circle and every further coordinate is a uniform
    preimage of the previous one.  This has the same law as drawing b_depth
    uniformly and multiplying down, but never multiplies an angle by a large
    integer, so deep coordinates keep full precision.
    """
    _check_depth(seq, depth)
    B = np.empty((size, 1))
    B[:, 0] = rng.uniform(-math.pi, math.pi, size=size)
    return refine(seq, B, depth, rng)


def haar_sample(seq: GroupSequence, depth: int, rng: np.random.Generator) -> SolenoidPoint:
    return SolenoidPoint.from_array(haar_sample_batch(seq, depth, 1, rng)[0])


def extend(seq: GroupSequence, point: SolenoidPoint, to_depth: int, rng: np.random.Generator) -> SolenoidPoint:
    if to_depth <= point.depth:
        raise ValueError("extension depth must exceed the current depth")
    return SolenoidPoint.from_array(refine(seq, point.array()[None, :], to_depth, rng)[0])


def deficits(dist: StepDistribution, B: np.ndarray) -> np.ndarray:
    """sum_{j<J} q_j (1 - cos b_{j+1}) for each row of a batch of depth J."""
    B = np.ascontiguousarray(B, dtype=np.float64)
    q = np.ascontiguousarray(dist.weights[: B.shape[1]], dtype=np.float64)
    return kernels.cos_deficit(B, q)


def char_values(dist: StepDistribution, B: np.ndarray) -> tuple[np.ndarray, float]:
    """Truncated characteristic function over a batch, with its error bound 2 Q_J."""
    J = B.shape[1]
    QJ = dist.tail(J)
    return (1.0 - QJ) - deficits(dist, B), 2.0 * QJ


def char_fn(dist: StepDistribution, point: SolenoidPoint) -> CharValue:
    """sum_{j<J} q_j cos b_{j+1}, and the bound 2 Q_J on what the truncation drops."""
    if point.depth < 1:
        raise ValueError("point depth must be at least 1")
    vals, bound = char_values(dist, point.array()[None, :])
    return CharValue(float(vals[0]), bound)


def depth_for_tolerance(dist: StepDistribution, eps: float) -> int:
    """Smallest J >= 1 with 2 Q_J <= eps."""
    for J in range(1, dist.seq.depth_cap + 1):
        if 2.0 * dist.tail(J) <= eps:
            return J
    raise DepthExceededError(f"no depth within depth_cap reaches tolerance {eps}")


@dataclass
class GapReport:
    applicable: bool
    samples: int = 0
    excluded_zero: int = 0
    violations: int = 0
    uncertified: int = 0
    min_gap: float = math.nan
    parity_point: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def modulus_gap_check(dist: StepDistribution, samples: int, depth: int, rng: np.random.Generator) -> GapReport:
    """Check that |mu_hat(y)| < 1 away from y = 0 on Haar samples.

    The gap is certified without truncation error:
    1 - mu_hat >= sum_{j<J} q_j (1 - cos b_{j+1}) and
    1 + mu_hat >= sum_{j<J} q_j (1 + cos b_{j+1}), so
    1 - |mu_hat| >= min of the two partial sums.  A violation is a nonzero
    sample whose certified gap is not positive.  ``uncertified`` counts samples
    whose truncated value comes within the band 2 Q_J of modulus 1.
    """
    seq = dist.seq
    _check_depth(seq, depth)
    q = dist.weights[:depth]
    if np.any(q <= 0):
        return GapReport(False, note="some q_j = 0 within depth; the gap bound needs every q_j > 0")
    B = haar_sample_batch(seq, depth, samples, rng)
    zero = np.all(np.abs(B) <= ZERO_ANGLE_TOL, axis=1)
    g = deficits(dist, B)
    head = 1.0 - dist.tail(depth)
    h = 2.0 * head - g
    gap = np.minimum(g, h)
    vals = head - g
    band = 2.0 * dist.tail(depth)
    live = ~zero
    # all-odd a admits the point (pi, pi, ...), where mu_hat = -1
    parity = all(a % 2 == 1 for a in seq.prefix(depth))
    return GapReport(
        True,
        samples=samples,
        excluded_zero=int(zero.sum()),
        violations=int(np.sum(gap[live] <= 0)),
        uncertified=int(np.sum(np.abs(vals[live]) >= 1 - band)),
        min_gap=float(gap[live].min()) if live.any() else math.nan,
        parity_point=parity,
        note="odd a_j: |mu_hat| = 1 at (pi, pi, ...)" if parity else "",
    )
