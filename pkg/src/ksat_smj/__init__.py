"""Solution-structure phase transition of random k-SAT.

The expected number of satisfying assignment pairs at similarity degree s
grows like exp(n f(s)) with f(s) = h(s) - r g(s).  The maximiser of f, the
major similarity degree, jumps discontinuously at a threshold ratio r_cr for
k >= 5.  :mod:`ksat_smj.analytic` holds the counting and probability
formulas, :mod:`ksat_smj.critical` the threshold machinery, and
:mod:`ksat_smj.lab` the brute-force and Monte Carlo counterparts.
"""

from .critical import (
    CriticalPoints,
    CurvePoint,
    Thresholds,
    curve,
    find_extrema,
    find_inflection,
    find_r_cr,
    major_similarity_degree,
)
from .errors import BudgetError, DomainError, UnprovenRegimeError

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "CriticalPoints",
    "CurvePoint",
    "DomainError",
    "Thresholds",
    "UnprovenRegimeError",
    "curve",
    "find_extrema",
    "find_inflection",
    "find_r_cr",
    "major_similarity_degree",
]
