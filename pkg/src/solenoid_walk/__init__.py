"""Recurrence of symmetric random walks on subgroups H_a of the rationals.

The subpackages cover exact group arithmetic, step laws, the dual solenoid,
its partition by escaping coordinate, the series classifier, Monte Carlo for
the recurrence integral, and exact walk simulation.
"""
__version__ = "0.1.0"

from .criteria import ClassificationReport, Verdict, classify
from .distribution import StepDistribution, make_distribution
from .group import GroupSequence, RationalElement
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "ClassificationReport",
    "GroupSequence",
    "RationalElement",
    "StepDistribution",
    "Verdict",
    "__version__",
    "classify",
    "make_distribution",
]
