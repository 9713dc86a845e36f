"""Series criteria for recurrence and the three-valued classifier.

Two series decide what can be decided:

* sufficient series  s_n = 1 / (a_1...a_n * sqrt(Q_n)); divergence => recurrent;
* necessary series   t_n = a_{n+1} / (a_1...a_n * sqrt(q_n)); recurrence => divergence
  (when every q_j > 0).

Convergence is only ever concluded from the exact growth class of the terms
(see :mod:`solenoid_walk.asymptotics`), never from partial sums, which are
reported for diagnostics only.  Between the two criteria there is a genuine
gap, so the verdict can be Inconclusive.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .asymptotics import GrowthLaw, decide_series, next_term_law, product_law
from .distribution import CustomTable, FiniteSupport, StepDistribution
from .group import GroupSequence

DEFAULT_N_TERMS = 64


class Verdict(str, enum.Enum):
    RECURRENT = "Recurrent"
    TRANSIENT = "Transient"
    INCONCLUSIVE = "Inconclusive"


class SeriesStatus(str, enum.Enum):
    DIVERGENT = "ProvenDivergent"
    CONVERGENT = "ProvenConvergent"
    UNDETERMINED = "Undetermined"


@dataclass
class SeriesDiagnostics:
    terms: list[float]
    partial_sums: list[float]
    status: SeriesStatus
    reason: str  # TermsBoundedBelow | RatioLimitBelowOne | ClosedFormComparison | None
    reason_value: Optional[float] = None
    description: str = ""
    law: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "reason": self.reason,
            "reason_value": self.reason_value,
            "description": self.description,
            "law": self.law,
            "terms": self.terms,
            "partial_sums": self.partial_sums,
        }


@dataclass
class ClassificationReport:
    verdict: Verdict
    fired: Optional[str]
    sufficient: SeriesDiagnostics
    necessary: Optional[SeriesDiagnostics]
    notes: list[str] = field(default_factory=list)
    contradiction: bool = False

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "fired": self.fired,
            "sufficient_series": self.sufficient.to_dict(),
            "necessary_series": self.necessary.to_dict() if self.necessary else "NotApplicable",
            "notes": list(self.notes),
            "contradiction": self.contradiction,
        }


def _scaled_inverse(P: int, root: float) -> float:
    """1 / (P * root) with P an exact integer that may exceed float range."""
    if root == 0.0:
        return math.inf
    try:
        return 1.0 / (float(P) * root)
    except OverflowError:
        return math.exp(-math.log(P) - math.log(root))


def sufficient_series_term(seq: GroupSequence, dist: StepDistribution, n: int) -> float:
    """1 / (a_1...a_n sqrt(Q_n)); +inf once the tail is empty."""
    return _scaled_inverse(seq.product_unchecked(n), math.sqrt(dist.tail(n)))


def necessary_series_term(seq: GroupSequence, dist: StepDistribution, n: int) -> float:
    """a_{n+1} / (a_1...a_n sqrt(q_n))."""
    q = dist.q(n)
    if q <= 0:
        raise ValueError(f"q_{n} = 0: the necessary criterion needs every q_j > 0")
    return seq.rule(n + 1) * _scaled_inverse(seq.product_unchecked(n), math.sqrt(q))


def _constant_p(seq: GroupSequence) -> Optional[int]:
    """p if a_j = p for every j, else None."""
    if not seq.is_eventually_periodic or len(set(seq.base + seq.period)) != 1:
        return None
    return seq.base[0]


def sufficient_series_formula(seq: GroupSequence) -> str:
    p = _constant_p(seq)
    return f"{p}^(-n)/sqrt(Q_n)" if p else "1/(a_1*...*a_n*sqrt(Q_n))"


def necessary_series_formula(seq: GroupSequence) -> str:
    p = _constant_p(seq)
    return f"{p}*{p}^(-n)/sqrt(q_n)" if p else "a_(n+1)/(a_1*...*a_n*sqrt(q_n))"


def series_verdict(terms: Callable[[int], float], law: Optional[GrowthLaw],
                   n_terms: int = DEFAULT_N_TERMS, start: int = 1) -> SeriesDiagnostics:
    """Decide sum_{n>=start} terms(n) from its growth law; tabulate n_terms values.

    With ``law=None`` the verdict is Undetermined whatever the partial sums do.
    """
    vals: list[float] = []
    sums: list[float] = []
    acc = 0.0
    for n in range(start, start + n_terms):
        v = terms(n)
        if v < 0:
            raise ValueError("series terms must be nonnegative")
        vals.append(v)
        acc += v
        sums.append(acc)
    if law is None:
        return SeriesDiagnostics(vals, sums, SeriesStatus.UNDETERMINED, "None",
                                 description="no growth law available; finite partial sums decide nothing")
    d = decide_series(law)
    status = SeriesStatus.CONVERGENT if d.convergent else SeriesStatus.DIVERGENT
    if d.kind == "bounded_below":
        # witness: the smallest tabulated term over the second half
        tail_vals = vals[len(vals) // 2:] or vals
        return SeriesDiagnostics(vals, sums, status, "TermsBoundedBelow", min(tail_vals, default=None),
                                 d.detail, law.describe())
    if d.kind == "ratio":
        return SeriesDiagnostics(vals, sums, status, "RatioLimitBelowOne", d.rate, d.detail, law.describe())
    return SeriesDiagnostics(vals, sums, status, "ClosedFormComparison", None, d.detail, law.describe())


def _sufficient_law(seq: GroupSequence, dist: StepDistribution) -> Optional[GrowthLaw]:
    Q = dist.tail_growth()
    if Q is None:
        return None
    return product_law(seq).inverse() * Q ** "-1/2"


def _necessary_law(seq: GroupSequence, dist: StepDistribution) -> Optional[GrowthLaw]:
    q = dist.weight_growth()
    if q is None:
        return None
    return next_term_law(seq) * product_law(seq).inverse() * q ** "-1/2"


def classify(seq: GroupSequence, dist: StepDistribution, n_terms: int = DEFAULT_N_TERMS) -> ClassificationReport:
    notes: list[str] = []
    n_tab = min(n_terms, seq.depth_cap)
    if dist.finite_support:
        suff = series_verdict(lambda n: sufficient_series_term(seq, dist, n), None, n_tab)
        suff.description = "Q_n = 0 beyond the support; terms are +inf there"
        notes.append(
            "finite support: the walk lives on the cyclic subgroup generated by "
            f"1/(a_1...a_{dist.max_index}), isomorphic to Z, where a symmetric walk with "
            "bounded steps is recurrent (classical result, outside the positivity hypothesis)"
        )
        return ClassificationReport(Verdict.RECURRENT, "FiniteSupport", suff, None, notes)

    if isinstance(dist.family, CustomTable) and dist.tail_growth() is None:
        notes.append("custom table without a declared tail law: convergence is not decidable")

    if not dist.closed_form:
        # a table only defines terms up to its last entry
        n_tab = min(n_tab, dist.max_index)
    suff = series_verdict(lambda n: sufficient_series_term(seq, dist, n), _sufficient_law(seq, dist), n_tab)
    nec: Optional[SeriesDiagnostics] = None
    if dist.positive:
        wl = dist.weight_growth()
        nec = series_verdict(lambda n: necessary_series_term(seq, dist, n),
                             _necessary_law(seq, dist) if wl is not None else None, n_tab)
        for n, (s, t) in enumerate(zip(suff.terms, nec.terms), start=1):
            # t_n / s_n = a_{n+1} sqrt(Q_n / q_n) >= a_{n+1}
            if math.isfinite(s) and t < seq.rule(n + 1) * s * (1 - 1e-12):
                raise ArithmeticError(f"ordering t_n >= a_(n+1) s_n fails at n={n}")
    else:
        notes.append("some q_j = 0 (or positivity unknown): the necessary criterion does not apply")

    contradiction = (
        suff.status is SeriesStatus.DIVERGENT
        and nec is not None
        and nec.status is SeriesStatus.CONVERGENT
    )
    if contradiction:
        notes.append("internal contradiction: sufficient series diverges but necessary series converges")
        return ClassificationReport(Verdict.INCONCLUSIVE, None, suff, nec, notes, True)
    if suff.status is SeriesStatus.DIVERGENT:
        return ClassificationReport(Verdict.RECURRENT, "Theorem1", suff, nec, notes)
    if nec is not None and nec.status is SeriesStatus.CONVERGENT:
        return ClassificationReport(Verdict.TRANSIENT, "Theorem2", suff, nec, notes)
    if suff.status is SeriesStatus.CONVERGENT and nec is not None and nec.status is SeriesStatus.DIVERGENT:
        notes.append("sufficient series converges while necessary series diverges: the criteria leave a gap")
    return ClassificationReport(Verdict.INCONCLUSIVE, None, suff, nec, notes)
