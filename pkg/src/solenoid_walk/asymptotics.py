"""Exact growth classes for positive sequences.

A :class:`GrowthLaw` records that a sequence satisfies

    u_n = Theta( (n!)**factorial * rate**n * n**poly )

where ``factorial`` and ``poly`` are rationals and ``rate`` is a finite
product of positive rationals raised to rational powers.  The class is closed
under products and rational powers, which is all that is needed to push the
growth of a_1...a_n and of the step weights through the two series
criteria.  Comparisons of ``rate`` with 1 are exact: raising to the common
denominator of the exponents turns the question into a comparison of two
fractions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10**12) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class Rate:
    """A positive real of the form prod(base_i ** exp_i), bases and exponents rational."""

    factors: tuple[tuple[Fraction, Fraction], ...] = ()

    @classmethod
    def of(cls, base, exponent=1) -> "Rate":
        b, e = _frac(base), _frac(exponent)
        if b <= 0:
            raise ValueError("rate bases must be positive")
        if b == 1 or e == 0:
            return cls()
        return cls(((b, e),))

    def _merged(self) -> dict[Fraction, Fraction]:
        out: dict[Fraction, Fraction] = {}
        for b, e in self.factors:
            out[b] = out.get(b, Fraction(0)) + e
        return {b: e for b, e in out.items() if e != 0 and b != 1}

    def __mul__(self, other: "Rate") -> "Rate":
        merged = dict(self._merged())
        for b, e in other._merged().items():
            merged[b] = merged.get(b, Fraction(0)) + e
        return Rate(tuple(sorted((b, e) for b, e in merged.items() if e != 0)))

    def __pow__(self, k) -> "Rate":
        k = _frac(k)
        return Rate(tuple(sorted((b, e * k) for b, e in self._merged().items() if e * k != 0)))

    def compare_one(self) -> int:
        """Sign of (rate - 1), decided exactly."""
        merged = self._merged()
        if not merged:
            return 0
        D = math.lcm(*(e.denominator for e in merged.values()))
        val = Fraction(1)
        for b, e in merged.items():
            val *= b ** int(e * D)
        return (val > 1) - (val < 1)

    def __float__(self) -> float:
        return math.exp(sum(float(e) * math.log(b) for b, e in self._merged().items()))

    def describe(self) -> str:
        merged = self._merged()
        if not merged:
            return "1"
        return "*".join(f"({b})^({e})" for b, e in sorted(merged.items()))


@dataclass(frozen=True)
class GrowthLaw:
    factorial: Fraction = Fraction(0)
    rate: Rate = field(default_factory=Rate)
    poly: Fraction = Fraction(0)

    @classmethod
    def make(cls, factorial=0, rate: Rate | None = None, poly=0) -> "GrowthLaw":
        return cls(_frac(factorial), rate or Rate(), _frac(poly))

    def __mul__(self, other: "GrowthLaw") -> "GrowthLaw":
        return GrowthLaw(self.factorial + other.factorial, self.rate * other.rate,
                         self.poly + other.poly)

    def __pow__(self, k) -> "GrowthLaw":
        k = _frac(k)
        return GrowthLaw(self.factorial * k, self.rate ** k, self.poly * k)

    def inverse(self) -> "GrowthLaw":
        return self ** -1

    def describe(self) -> str:
        return f"(n!)^({self.factorial}) * [{self.rate.describe()}]^n * n^({self.poly})"

    def to_dict(self) -> dict:
        return {
            "factorial": str(self.factorial),
            "rate": [[str(b), str(e)] for b, e in self.rate.factors],
            "poly": str(self.poly),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GrowthLaw":
        rate_spec = d.get("rate", 1)
        if isinstance(rate_spec, (list, tuple)):
            rate = Rate()
            for b, e in rate_spec:
                rate = rate * Rate.of(b, e)
        else:
            rate = Rate.of(rate_spec)
        return cls.make(d.get("factorial", 0), rate, d.get("poly", 0))


def tail_law(weights: GrowthLaw) -> GrowthLaw:
    """Growth of Q_n = sum_{j>=n} q_j given the growth of q_n.

    Only summable classes are accepted; anything else means the weights
    cannot be a probability law.
    """
    if weights.factorial < 0:
        return weights
    if weights.factorial > 0:
        raise ValueError("weights grow factorially; not summable")
    c = weights.rate.compare_one()
    if c < 0:
        return weights
    if c > 0:
        raise ValueError("weights grow geometrically; not summable")
    if weights.poly < -1:
        return GrowthLaw(Fraction(0), Rate(), weights.poly + 1)
    raise ValueError("weights decay like n^p with p >= -1; not summable")


@dataclass(frozen=True)
class SeriesDecision:
    """Outcome of the exact convergence test for sum_n u_n with u_n in a GrowthLaw."""

    convergent: bool
    kind: str  # "bounded_below" | "ratio" | "comparison"
    rate: float
    detail: str


def decide_series(law: GrowthLaw) -> SeriesDecision:
    desc = law.describe()
    if law.factorial > 0:
        return SeriesDecision(False, "bounded_below", math.inf, f"terms grow factorially: {desc}")
    if law.factorial < 0:
        return SeriesDecision(True, "ratio", 0.0, f"terms decay factorially: {desc}")
    c = law.rate.compare_one()
    r = float(law.rate)
    if c < 0:
        return SeriesDecision(True, "ratio", r, f"geometric decay at rate {r:.6g}: {desc}")
    if c > 0:
        return SeriesDecision(False, "bounded_below", r, f"geometric growth at rate {r:.6g}: {desc}")
    if law.poly >= 0:
        return SeriesDecision(False, "bounded_below", 1.0, f"terms bounded below: {desc}")
    if law.poly >= -1:
        return SeriesDecision(False, "comparison", 1.0,
                              f"terms ~ n^({law.poly}); p-series with p <= 1 diverges")
    return SeriesDecision(True, "comparison", 1.0,
                          f"terms ~ n^({law.poly}); p-series with p > 1 converges")


def product_law(seq) -> GrowthLaw:
    """Growth of a_1...a_n for an eventually periodic or arithmetic sequence."""
    if seq.is_eventually_periodic:
        period = seq.period
        return GrowthLaw.make(0, Rate.of(math.prod(period), Fraction(1, len(period))), 0)
    d = seq.extension.step
    L = len(seq.base)
    # a_j = d * (j + c0) beyond the base, so a_1...a_n ~ d^n * Gamma(n + 1 + c0) ~ d^n n! n^c0
    c0 = Fraction(seq.base[-1], d) - L
    return GrowthLaw.make(1, Rate.of(d), c0)


def next_term_law(seq) -> GrowthLaw:
    """Growth of a_{n+1}."""
    if seq.is_eventually_periodic:
        return GrowthLaw()
    return GrowthLaw.make(0, None, 1)
