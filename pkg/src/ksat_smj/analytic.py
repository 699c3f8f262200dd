"""Exact and asymptotic first-moment formulas for satisfying assignment pairs.

Everything that can overflow is computed in log space; the linear-valued
functions are thin ``exp`` views over the ``log_*`` ones.  Exact formulas take
an integer similarity number ``S``; asymptotic/rate formulas take a real
similarity degree ``s`` in [0, 1] and accept numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

LN2 = math.log(2.0)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class ModelParams:
    """Random k-SAT model size: ``m`` clauses of ``k`` distinct variables over ``n``."""

    k: int
    n: int
    m: int
    r: float

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise DomainError(f"need k >= 1 and n >= 1, got k={self.k}, n={self.n}")
        if self.m < 0 or self.r < 0:
            raise DomainError(f"need m >= 0 and r >= 0, got m={self.m}, r={self.r}")

    @classmethod
    def from_ratio(cls, k: int, n: int, r: float) -> "ModelParams":
        return cls(k=k, n=n, m=round_half_up(r * n), r=float(r))

    @classmethod
    def from_clauses(cls, k: int, n: int, m: int) -> "ModelParams":
        return cls(k=k, n=n, m=m, r=m / n)


@dataclass(frozen=True)
class SimilarityPoint:
    S: int
    n: int

    def __post_init__(self):
        if not 0 <= self.S <= self.n:
            raise DomainError(f"similarity number {self.S} outside [0, {self.n}]")

    @property
    def s(self) -> float:
        return self.S / self.n

    @classmethod
    def nearest(cls, n: int, s: float) -> "SimilarityPoint":
        """Integer point closest to degree ``s``; ``.s`` reports the degree actually used."""
        return cls(S=round_half_up(s * n), n=n)


@dataclass(frozen=True)
class RateFunctions:
    h: float
    g: float
    rho: float
    tau: float
    f: float


# -- assignment pairs ---------------------------------------------------------


def _bits(a) -> np.ndarray:
    return np.asarray(getattr(a, "bits", a), dtype=bool).ravel()


def similarity_number(a, b) -> int:
    """Number of coordinates on which two assignments agree."""
    xa, xb = _bits(a), _bits(b)
    if xa.shape != xb.shape:
        raise DomainError(f"assignment lengths differ: {xa.size} != {xb.size}")
    return int(np.count_nonzero(xa == xb))


def similarity_degree(a, b) -> float:
    n = _bits(a).size
    if n == 0:
        raise DomainError("similarity degree needs n >= 1")
    return similarity_number(a, b) / n


# -- exact probabilities ------------------------------------------------------


def log_single_sat_probability(k: int, m: int) -> float:
    if k < 1 or m < 0:
        raise DomainError(f"need k >= 1 and m >= 0, got k={k}, m={m}")
    if m == 0:
        return 0.0
    return m * math.log1p(-(0.5**k))


def single_sat_probability(k: int, m: int) -> float:
    """Probability that a fixed assignment satisfies ``m`` random k-clauses."""
    return math.exp(log_single_sat_probability(k, m))


def _check_nks(n: int, k: int, S: int) -> None:
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0 <= S <= n:
        raise DomainError(f"similarity number {S} outside [0, {n}]")


def falling_factorial_ratio(n: int, k: int, S: int) -> float:
    """S(S-1)...(S-k+1) / n(n-1)...(n-k+1), zero once a factor hits zero."""
    _check_nks(n, k, S)
    if S < k:
        return 0.0
    out = 1.0
    for i in range(k):
        out *= (S - i) / (n - i)
    return out


def clause_pair_agreement_fraction(n: int, k: int, S: int) -> Fraction:
    """Exact rational form of :func:`clause_pair_agreement_probability`."""
    _check_nks(n, k, S)
    ratio = Fraction(math.perm(S, k), math.perm(n, k))
    return (2**k - 2 + ratio) / 2**k


def clause_pair_agreement_probability(n: int, k: int, S: int) -> float:
    """Probability that one random k-clause is satisfied by both members of a
    pair of assignments agreeing on exactly ``S`` of ``n`` variables.

    A clause fails one assignment for exactly one polarity pattern per
    variable set; both fail together only if the set lies inside the
    agreement set.
    """
    return 1.0 - (2.0 - falling_factorial_ratio(n, k, S)) / 2**k


def log_pair_sat_probability_exact(n: int, k: int, m: int, S: int) -> float:
    if m < 0:
        raise DomainError(f"need m >= 0, got m={m}")
    deficit = (2.0 - falling_factorial_ratio(n, k, S)) / 2**k
    if m == 0:
        return 0.0
    if deficit >= 1.0:
        return -math.inf
    return m * math.log1p(-deficit)


def pair_sat_probability_exact(n: int, k: int, m: int, S: int) -> float:
    return math.exp(log_pair_sat_probability_exact(n, k, m, S))


# -- rate functions (vectorised over s) ---------------------------------------


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def _s_array(s) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise DomainError("similarity degree must lie in [0, 1]")
    return arr


def entropy_h(s):
    """ln 2 - s ln s - (1-s) ln(1-s), equal to ln 2 at both endpoints."""
    arr = _s_array(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(
            (arr > 0) & (arr < 1),
            -arr * np.log(np.where(arr > 0, arr, 1.0))
            - (1 - arr) * np.log(np.where(arr < 1, 1 - arr, 1.0)),
            0.0,
        )
    return _ret(LN2 + inner)


def log_penalty_g(k: int, s):
    """g(s) = ln 2^k - ln(2^k - 2 + s^k)."""
    arr = _s_array(s)
    return _ret(k * LN2 - np.log(2.0**k - 2.0 + arr**k))


def rho(k: int, s):
    """k(k-1)(s^k - s^(k-1)) / (2(2^k - 2 + s^k)): the O(1) log correction per unit r."""
    arr = _s_array(s)
    return _ret(k * (k - 1) * (arr**k - arr ** (k - 1)) / (2.0 * (2.0**k - 2.0 + arr**k)))


def sigma(k: int, s, r: float):
    """Prefactor of the asymptotic pair probability, exp(r * rho)."""
    return _ret(np.exp(r * np.asarray(rho(k, s))))


def tau(n: int, s):
    arr = _s_array(s)
    interior = (arr > 0) & (arr < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(interior, 1.0 / np.sqrt(2 * math.pi * n * arr * (1 - arr)), 1.0)
    return _ret(val)


def rate_f(k: int, r: float, s):
    """Growth exponent f(s) = h(s) - r g(s) of the expected satisfying-pair count."""
    return _ret(np.asarray(entropy_h(s)) - r * np.asarray(log_penalty_g(k, s)))


def rate_functions(k: int, r: float, s: float, n: int) -> RateFunctions:
    h = entropy_h(s)
    g = log_penalty_g(k, s)
    return RateFunctions(h=h, g=g, rho=rho(k, s), tau=tau(n, s), f=h - r * g)


def g_prime(k: int, s):
    arr = _s_array(s)
    return _ret(-k * arr ** (k - 1) / (2.0**k - 2.0 + arr**k))


def rate_f_prime(k: int, r: float, s):
    """df/ds on the open interval (0, 1)."""
    arr = _s_array(s)
    return _ret(np.log1p(-arr) - np.log(arr) - r * np.asarray(g_prime(k, arr)))


# -- asymptotic probabilities and counts --------------------------------------


def log_pair_sat_probability_asymptotic(k: int, r: float, s: float, n: int) -> float:
    if k < 2 or r < 0:
        raise DomainError(f"need k >= 2 and r >= 0, got k={k}, r={r}")
    return r * rho(k, s) - n * r * log_penalty_g(k, s)


def pair_sat_probability_asymptotic(k: int, r: float, s: float, n: int) -> float:
    return math.exp(log_pair_sat_probability_asymptotic(k, r, s, n))


def pairs_count_exact(n: int, S: int) -> int:
    """Ordered assignment pairs (self-pairs included) agreeing on exactly S variables."""
    if not 0 <= S <= n:
        raise DomainError(f"similarity number {S} outside [0, {n}]")
    return 2**n * math.comb(n, S)


def log_pairs_count_exact(n: int, S: int) -> float:
    if not 0 <= S <= n:
        raise DomainError(f"similarity number {S} outside [0, {n}]")
    return n * LN2 + math.lgamma(n + 1) - math.lgamma(S + 1) - math.lgamma(n - S + 1)


def log_pairs_count_asymptotic(n: int, s: float) -> float:
    return math.log(tau(n, s)) + n * entropy_h(s)


def pairs_count_asymptotic(n: int, s: float) -> float:
    return math.exp(log_pairs_count_asymptotic(n, s))


def log_expected_sat_pairs_exact(n: int, k: int, m: int, S: int) -> float:
    """ln E(number of ordered satisfying pairs with similarity number S)."""
    return log_pairs_count_exact(n, S) + log_pair_sat_probability_exact(n, k, m, S)


def expected_sat_pairs_exact(n: int, k: int, m: int, S: int) -> float:
    """Linear view of the expectation; ``inf`` when it overflows a double."""
    count = pairs_count_exact(n, S)
    if count.bit_length() < 1000:
        return float(count) * pair_sat_probability_exact(n, k, m, S)
    try:
        return math.exp(log_expected_sat_pairs_exact(n, k, m, S))
    except OverflowError:
        return math.inf


def log_expected_sat_pairs_asymptotic(n: int, k: int, r: float, s: float) -> float:
    return log_pairs_count_asymptotic(n, s) + log_pair_sat_probability_asymptotic(k, r, s, n)
