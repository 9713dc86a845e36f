"""Exact arithmetic on the rational group H_a = { m / (a_1 a_2 ... a_n) }.

A group is fixed by its integer sequence ``a = (a_1, a_2, ...)`` with every
``a_j > 1``.  Only a finite prefix is stored; the rest follows from an
extension rule.  Elements are kept in canonical form ``m / (a_1...a_n)`` with
``a_n`` not dividing ``m`` (or ``n == 0``), so equality of elements is
equality of ``(numerator, level)`` pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

DEFAULT_DEPTH_CAP = 64


class DepthExceededError(ValueError):
    """Raised when an index beyond the sequence's depth cap is requested."""


@dataclass(frozen=True)
class Periodic:
    """Repeat the explicit base forever."""


@dataclass(frozen=True)
class Constant:
    """After the base, every a_j equals ``p``."""

    p: int


@dataclass(frozen=True)
class Arithmetic:
    """After the base, a_j grows by ``step`` per index (a_{L+i} = a_L + i*step)."""

    step: int


Extension = Union[Periodic, Constant, Arithmetic]


@dataclass(frozen=True)
class GroupSequence:
    base: tuple[int, ...]
    extension: Extension = field(default_factory=Periodic)
    depth_cap: int = DEFAULT_DEPTH_CAP
    _products: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = tuple(int(x) for x in self.base)
        object.__setattr__(self, "base", base)
        if not base:
            raise ValueError("base sequence must be nonempty")
        if any(x <= 1 for x in base):
            raise ValueError(f"every a_j must exceed 1, got {base}")
        if self.depth_cap < len(base):
            raise ValueError("depth_cap must be at least the base length")
        ext = self.extension
        if isinstance(ext, Constant) and ext.p <= 1:
            raise ValueError("constant extension needs p > 1")
        if isinstance(ext, Arithmetic) and ext.step < 0:
            raise ValueError("arithmetic extension needs step >= 0")
        prods = [1]
        for j in range(1, self.depth_cap + 1):
            prods.append(prods[-1] * self.rule(j))
        object.__setattr__(self, "_products", tuple(prods))

    @classmethod
    def constant(cls, p: int, depth_cap: int = DEFAULT_DEPTH_CAP) -> "GroupSequence":
        """The H_p special case, a_j = p for every j."""
        return cls((p,), Periodic(), depth_cap)

    def rule(self, j: int) -> int:
        """a_j from the extension rule, with no depth-cap check."""
        if j < 1:
            raise ValueError("sequence indices start at 1")
        L = len(self.base)
        if j <= L and not isinstance(self.extension, Periodic):
            return self.base[j - 1]
        ext = self.extension
        if isinstance(ext, Periodic):
            return self.base[(j - 1) % L]
        if isinstance(ext, Constant):
            return ext.p
        return self.base[-1] + (j - L) * ext.step

    def a(self, j: int) -> int:
        if j > self.depth_cap:
            raise DepthExceededError(f"a_{j} requested beyond depth_cap={self.depth_cap}")
        return self.rule(j)

    def product(self, n: int) -> int:
        """a_1 * ... * a_n as an exact integer (1 for n = 0)."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n > self.depth_cap:
            raise DepthExceededError(f"product up to {n} exceeds depth_cap={self.depth_cap}")
        return self._products[n]

    def product_unchecked(self, n: int) -> int:
        if n <= self.depth_cap:
            return self._products[n]
        p = self._products[-1]
        for j in range(self.depth_cap + 1, n + 1):
            p *= self.rule(j)
        return p

    def prefix(self, n: int) -> list[int]:
        """[a_1, ..., a_n]."""
        return [self.a(j) for j in range(1, n + 1)]

    # eventual structure, used by the asymptotic analysis
    @property
    def preperiod(self) -> int:
        return 0 if isinstance(self.extension, Periodic) else len(self.base)

    @property
    def period(self) -> tuple[int, ...]:
        ext = self.extension
        if isinstance(ext, Periodic):
            return self.base
        if isinstance(ext, Constant):
            return (ext.p,)
        if ext.step == 0:
            return (self.base[-1],)
        raise ValueError("arithmetic sequences are not eventually periodic")

    @property
    def is_eventually_periodic(self) -> bool:
        ext = self.extension
        return not (isinstance(ext, Arithmetic) and ext.step > 0)

    def to_dict(self) -> dict:
        ext = self.extension
        if isinstance(ext, Periodic):
            ext_d = {"kind": "periodic"}
        elif isinstance(ext, Constant):
            ext_d = {"kind": "constant", "p": ext.p}
        else:
            ext_d = {"kind": "arithmetic", "step": ext.step}
        return {"base": list(self.base), "extension": ext_d, "depth_cap": self.depth_cap}

    @classmethod
    def from_dict(cls, d: dict) -> "GroupSequence":
        ext_d = d.get("extension", {"kind": "periodic"})
        kind = ext_d.get("kind", "periodic")
        if kind == "periodic":
            ext: Extension = Periodic()
        elif kind == "constant":
            ext = Constant(int(ext_d["p"]))
        elif kind == "arithmetic":
            ext = Arithmetic(int(ext_d["step"]))
        else:
            raise ValueError(f"unknown extension kind {kind!r}")
        return cls(tuple(d["base"]), ext, int(d.get("depth_cap", DEFAULT_DEPTH_CAP)))


@dataclass(frozen=True, order=False)
class RationalElement:
    """The element numerator / (a_1...a_level) of H_a, in canonical form."""

    numerator: int
    level: int = 0

    def value(self, seq: GroupSequence) -> Fraction:
        return Fraction(self.numerator, seq.product(self.level))

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    def __str__(self):
        return f"{self.numerator}@{self.level}"


ZERO = RationalElement(0, 0)


def canonicalize(m: int, n: int, seq: GroupSequence) -> RationalElement:
    """Reduce m / (a_1...a_n) by stripping factors a_n, a_{n-1}, ... from m."""
    if n > seq.depth_cap:
        raise DepthExceededError(f"level {n} exceeds depth_cap={seq.depth_cap}")
    if m == 0:
        return ZERO
    while n > 0:
        q, r = divmod(m, seq.rule(n))
        if r:
            break
        m, n = q, n - 1
    return RationalElement(m, n)


def generator(seq: GroupSequence, n: int, sign: int = 1) -> RationalElement:
    """The natural generator e_{+-n} = +-1/(a_1...a_n)."""
    if n < 0:
        raise ValueError("generator index must be nonnegative")
    if n > seq.depth_cap:
        raise DepthExceededError(f"generator e_{n} exceeds depth_cap={seq.depth_cap}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return RationalElement(sign, n)


def add(x: RationalElement, y: RationalElement, seq: GroupSequence) -> RationalElement:
    L = max(x.level, y.level)
    if L > seq.depth_cap:
        raise DepthExceededError(f"level {L} exceeds depth_cap={seq.depth_cap}")
    mx = x.numerator * (seq.product(L) // seq.product(x.level))
    my = y.numerator * (seq.product(L) // seq.product(y.level))
    return canonicalize(mx + my, L, seq)


def neg(x: RationalElement) -> RationalElement:
    return RationalElement(-x.numerator, x.level)


def from_fraction(value: Fraction, seq: GroupSequence) -> RationalElement:
    """Locate a rational in H_a, raising if it is not a member within depth_cap."""
    value = Fraction(value)
    for n in range(seq.depth_cap + 1):
        P = seq.product(n)
        if P % value.denominator == 0:
            return canonicalize(value.numerator * (P // value.denominator), n, seq)
    raise DepthExceededError(f"{value} is not in H_a up to depth_cap={seq.depth_cap}")
