"""Critical-point curve r(s), its extrema and inflection, and the jump of the
major similarity degree at the threshold ratio r_cr.

The stationary points of f(s) = h(s) - r g(s) on [0.5, 1) are exactly the
solutions of r(s) = r, where

    r(s) = (1/k) ((2^k - 2) s^(1-k) + s) (ln s - ln(1 - s)).

For k >= 5 r(s) rises to a local maximum at s01, falls to a local minimum at
s03 (inflection s02 in between) and then diverges as s -> 1.  Inverting r on
the three monotone pieces gives the branches s1, s2, s3; the major similarity
degree is whichever of s1(r), s3(r) has the larger f.

Internally points near s = 1 are carried by their complement u = 1 - s.  For
k >= 9 the upper branch reaches r(s01) only at u far below double-precision
spacing near 1, so branch 3 is solved in ln u.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from . import analytic
from .errors import DomainError, UnprovenRegimeError

S_MAX = 1.0 - 1e-12
SCAN_HI = 1.0 - 1e-9
SCAN_POINTS = 10_000
S_TOL = 1e-12
R_TOL = 1e-10
MAX_ITER = 200
MIN_K = 5
# ln u floor for the upper branch; u = e^-690 is still a normal double
LOG_U_MIN = -690.0

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CriticalPoints:
    k: int
    s01: float
    s02: float
    s03: float
    r_at_s01: float
    r_at_s03: float


@dataclass(frozen=True)
class Thresholds:
    k: int
    r_cr: float
    s1cr: float
    s3cr: float
    bracket_lo: float
    bracket_hi: float
    residual: float
    critical: CriticalPoints


@dataclass(frozen=True)
class CurvePoint:
    r: float
    smj: Union[float, tuple]
    branch: str
    f_s1: Optional[float]
    f_s3: Optional[float]
    # 1 - smj computed without cancellation (for a tie: of the upper value)
    smj_complement: float


# -- r(s) and derivatives -----------------------------------------------------


def _check_s(s, lo=0.5):
    arr = np.asarray(s, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < lo) or np.any(arr >= 1.0):
        raise DomainError(f"s must lie in [{lo}, 1)")
    return np.minimum(arr, S_MAX)


def _parts(k, s):
    """A, A', A'', L, L', L'' for r = A L / k, vectorised."""
    c = 2.0**k - 2.0
    u = 1.0 - s
    A = c * s ** (1 - k) + s
    A1 = c * (1 - k) * s ** (-k) + 1.0
    A2 = c * k * (k - 1) * s ** (-k - 1)
    L = np.log(s) - np.log(u)
    L1 = 1.0 / (s * u)
    L2 = 1.0 / u**2 - 1.0 / s**2
    return A, A1, A2, L, L1, L2


def r_of_s(k: int, s):
    """Ratio at which s is a stationary point of the rate function."""
    if k < 2:
        raise DomainError(f"need k >= 2, got {k}")
    s = _check_s(s)
    A, _, _, L, _, _ = _parts(k, s)
    return analytic._ret(A * L / k)


def r_prime(k: int, s):
    s = _check_s(s)
    A, A1, _, L, L1, _ = _parts(k, s)
    return analytic._ret((A1 * L + A * L1) / k)


def r_double_prime(k: int, s):
    s = _check_s(s)
    A, A1, A2, L, L1, L2 = _parts(k, s)
    return analytic._ret((A2 * L + 2.0 * A1 * L1 + A * L2) / k)


def inflection_factor_base(k: int, s):
    s = _check_s(s)
    L = np.log(s) - np.log1p(-s)
    return analytic._ret(k * (k - 1) * L * (1 - s) ** 2 - 2 * (k - 1) * (1 - s) + 2 * s - 1)


def inflection_factor(k: int, s):
    """Sign-carrying factor of r''(s): r'' = F(s) (2^k-2) / (k s^(k+1) (1-s)^2)."""
    s = _check_s(s)
    return analytic._ret(np.asarray(inflection_factor_base(k, s)) + s**k / (2.0**k - 2.0))


# scalar complement forms, accurate for u far below 1e-16


def _r_u(k: int, u: float) -> float:
    c = 2.0**k - 2.0
    ln_s = math.log1p(-u)
    return (c * math.exp((1 - k) * ln_s) + 1.0 - u) * (ln_s - math.log(u)) / k


def _f_u(k: int, r: float, u: float) -> float:
    ln_s = math.log1p(-u)
    h = LN2 - u * math.log(u) - (1.0 - u) * ln_s
    g = k * LN2 - math.log(2.0**k - 2.0 + math.exp(k * ln_s))
    return h - r * g


def rate_f_complement(k: int, r: float, u: float) -> float:
    """f(1 - u) evaluated from the complement u in (0, 0.5]."""
    if not 0.0 < u <= 0.5:
        raise DomainError(f"complement must lie in (0, 0.5], got {u}")
    return _f_u(k, r, u)


# -- bracketing ---------------------------------------------------------------


def bisect(func: Callable[[float], float], lo: float, hi: float,
           xtol: float = 0.0, maxiter: int = MAX_ITER):
    """Sign-change bisection; returns ``(x, iterations)``.

    With ``xtol=0`` the interval is halved until the midpoint is no longer
    representable between the endpoints.  The endpoint with the smaller
    residual is returned.
    """
    flo, fhi = func(lo), func(hi)
    if flo == 0.0:
        return lo, 0
    if fhi == 0.0:
        return hi, 0
    if (flo > 0) == (fhi > 0):
        raise DomainError(f"no sign change on [{lo!r}, {hi!r}]")
    it = 0
    while it < maxiter and hi - lo > xtol:
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        it += 1
        fmid = func(mid)
        if fmid == 0.0:
            return mid, it
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return (lo if abs(flo) <= abs(fhi) else hi), it


def sign_changes(values) -> np.ndarray:
    """Indices i where values[i] and values[i+1] have strictly opposite signs."""
    sg = np.sign(np.asarray(values))
    return np.flatnonzero(sg[:-1] * sg[1:] < 0)


def scan_report(k: int, points: int = SCAN_POINTS) -> dict:
    """Sign-change locations of r' and r'' on a uniform grid over [0.5, 1 - 1e-9]."""
    grid = np.linspace(0.5, SCAN_HI, points)
    d1 = np.asarray(r_prime(k, grid))
    d2 = np.asarray(r_double_prime(k, grid))
    i1, i2 = sign_changes(d1), sign_changes(d2)
    return {
        "k": k,
        "points": points,
        "r_prime_sign_changes": int(i1.size),
        "r_double_prime_sign_changes": int(i2.size),
        "r_prime_roots_near": [float(grid[i]) for i in i1],
        "r_double_prime_roots_near": [float(grid[i]) for i in i2],
    }


def _require_regime(k: int, report: dict) -> None:
    if k < MIN_K:
        raise UnprovenRegimeError(
            f"k={k}: the two-extrema structure of r(s) is only established for k >= {MIN_K}",
            report,
        )
    if report["r_double_prime_sign_changes"] != 1 or report["r_prime_sign_changes"] != 2:
        raise UnprovenRegimeError(
            f"k={k}: expected 1 inflection and 2 extrema, scan found "
            f"{report['r_double_prime_sign_changes']} and {report['r_prime_sign_changes']}",
            report,
        )


def find_inflection(k: int, xtol: float = S_TOL) -> float:
    """Unique root s02 of r''(s) on [0.5, 1), found by bisecting the inflection factor."""
    return _extrema(k, xtol).s02


def find_extrema(k: int, xtol: float = S_TOL) -> CriticalPoints:
    return _extrema(k, xtol)


@lru_cache(maxsize=64)
def _extrema(k: int, xtol: float) -> CriticalPoints:
    report = scan_report(k)
    _require_regime(k, report)
    grid = np.linspace(0.5, SCAN_HI, SCAN_POINTS)
    step = grid[1] - grid[0]

    def cell(x):
        return float(x), float(min(x + step, SCAN_HI))

    lo, hi = cell(report["r_double_prime_roots_near"][0])
    s02, _ = bisect(lambda s: inflection_factor(k, s), lo, hi, xtol)

    d1 = lambda s: r_prime(k, s)  # noqa: E731
    lo, hi = cell(report["r_prime_roots_near"][0])
    s01, _ = bisect(d1, lo, hi, xtol)
    lo, hi = cell(report["r_prime_roots_near"][1])
    s03, _ = bisect(d1, lo, hi, xtol)
    if not 0.5 < s01 < s02 < s03 < 1.0:
        raise UnprovenRegimeError(f"k={k}: root ordering violated ({s01}, {s02}, {s03})", report)
    return CriticalPoints(k=k, s01=s01, s02=s02, s03=s03,
                          r_at_s01=r_of_s(k, s01), r_at_s03=r_of_s(k, s03))


# -- inverse branches ---------------------------------------------------------


def _branch_domain(cp: CriticalPoints, branch: int):
    if branch == 1:
        return 0.0, cp.r_at_s01
    if branch == 2:
        return cp.r_at_s03, cp.r_at_s01
    if branch == 3:
        return cp.r_at_s03, _r_u(cp.k, math.exp(LOG_U_MIN))
    raise DomainError(f"branch must be 1, 2 or 3, got {branch}")


def _invert_complement(k: int, branch: int, r: float, cp: CriticalPoints) -> float:
    lo_r, hi_r = _branch_domain(cp, branch)
    slack = 1e-12 * max(1.0, abs(hi_r))
    if not lo_r - slack <= r <= hi_r + slack:
        raise DomainError(f"r={r!r} outside branch {branch} domain [{lo_r!r}, {hi_r!r}]")
    r = min(max(r, lo_r), hi_r)
    u01, u03 = 1.0 - cp.s01, 1.0 - cp.s03
    if branch == 1:
        if r == lo_r:
            return 0.5
        if r == hi_r:
            return u01
        u, _ = bisect(lambda u: _r_u(k, u) - r, u01, 0.5)
    elif branch == 2:
        if r == lo_r:
            return u03
        if r == hi_r:
            return u01
        u, _ = bisect(lambda u: _r_u(k, u) - r, u03, u01)
    else:
        if r == lo_r:
            return u03
        t, _ = bisect(lambda t: _r_u(k, math.exp(t)) - r, LOG_U_MIN, math.log(u03))
        u = math.exp(t)
    return u


def invert_branch(k: int, branch: int, r: float) -> float:
    """The s on monotone piece ``branch`` of r(s) with r(s) = r."""
    return 1.0 - invert_branch_complement(k, branch, r)


def invert_branch_complement(k: int, branch: int, r: float) -> float:
    """Like :func:`invert_branch` but returns 1 - s, exact even when s rounds to 1."""
    return _invert_complement(k, branch, float(r), find_extrema(k))


# -- the threshold ------------------------------------------------------------


def _check_bracket(cp: CriticalPoints, r: float) -> float:
    lo, hi = cp.r_at_s03, cp.r_at_s01
    slack = 1e-12 * hi
    if not lo - slack <= r <= hi + slack:
        raise DomainError(f"r={r!r} outside [r(s03), r(s01)] = [{lo!r}, {hi!r}]")
    return min(max(r, lo), hi)


def big_F(k: int, r: float) -> float:
    """f(s1(r)) - f(s3(r)): which local maximum of the rate function dominates."""
    cp = find_extrema(k)
    r = _check_bracket(cp, float(r))
    u1 = _invert_complement(k, 1, r, cp)
    u3 = _invert_complement(k, 3, r, cp)
    return _f_u(k, r, u1) - _f_u(k, r, u3)


def big_F_prime(k: int, r: float) -> float:
    """dF/dr = ln(2^k - 2 + s1^k) - ln(2^k - 2 + s3^k), negative on the bracket."""
    cp = find_extrema(k)
    r = _check_bracket(cp, float(r))
    c = 2.0**k - 2.0
    u1 = _invert_complement(k, 1, r, cp)
    u3 = _invert_complement(k, 3, r, cp)
    return math.log(c + math.exp(k * math.log1p(-u1))) - math.log(c + math.exp(k * math.log1p(-u3)))


def find_r_cr(k: int, rtol: float = R_TOL, xtol: float = S_TOL) -> Thresholds:
    """Threshold ratio where the two local maxima of f exchange dominance."""
    return _thresholds(k, rtol, xtol)


@lru_cache(maxsize=64)
def _thresholds(k: int, rtol: float, xtol: float) -> Thresholds:
    cp = find_extrema(k, xtol)

    def F(r):
        u1 = _invert_complement(k, 1, r, cp)
        u3 = _invert_complement(k, 3, r, cp)
        return _f_u(k, r, u1) - _f_u(k, r, u3)

    r_cr, _ = bisect(F, cp.r_at_s03, cp.r_at_s01, rtol)
    u1 = _invert_complement(k, 1, r_cr, cp)
    u3 = _invert_complement(k, 3, r_cr, cp)
    residual = abs(_f_u(k, r_cr, u1) - _f_u(k, r_cr, u3))
    return Thresholds(k=k, r_cr=r_cr, s1cr=1.0 - u1, s3cr=1.0 - u3,
                      bracket_lo=cp.r_at_s03, bracket_hi=cp.r_at_s01,
                      residual=residual, critical=cp)


# -- major similarity degree --------------------------------------------------


def major_similarity_degree(k: int, r: float, tie_tol: float = R_TOL,
                            rtol: float = R_TOL, xtol: float = S_TOL) -> CurvePoint:
    """Global maximiser of f on [0.5, 1) at ratio ``r``.

    Within ``tie_tol`` of r_cr both maximisers are reported as a tuple.
    """
    if r < 0:
        raise DomainError(f"need r >= 0, got {r}")
    th = find_r_cr(k, rtol, xtol)
    cp = th.critical
    r = float(r)
    f1 = f3 = None
    u1 = u3 = None
    if r <= cp.r_at_s01:
        u1 = _invert_complement(k, 1, r, cp)
        f1 = _f_u(k, r, u1)
    if r >= cp.r_at_s03:
        u3 = _invert_complement(k, 3, r, cp)
        f3 = _f_u(k, r, u3)

    if u3 is None:
        return CurvePoint(r, 1.0 - u1, "s1", f1, None, u1)
    if u1 is None:
        return CurvePoint(r, 1.0 - u3, "s3", None, f3, u3)
    if abs(r - th.r_cr) <= tie_tol:
        return CurvePoint(r, (1.0 - u1, 1.0 - u3), "tie", f1, f3, u3)
    if f1 > f3:
        return CurvePoint(r, 1.0 - u1, "s1", f1, f3, u1)
    return CurvePoint(r, 1.0 - u3, "s3", f1, f3, u3)


def r_grid(r_min: float, r_max: float, step: float) -> np.ndarray:
    """r_min, r_min + step, ... up to r_max (inclusive up to rounding); empty if r_min == r_max."""
    if step <= 0:
        raise DomainError(f"step must be positive, got {step}")
    if r_min < 0 or r_max < r_min:
        raise DomainError(f"need 0 <= r_min <= r_max, got [{r_min}, {r_max}]")
    if r_max == r_min:
        return np.empty(0)
    count = int(math.floor((r_max - r_min) / step + 1e-9)) + 1
    return r_min + step * np.arange(count)


def curve(k: int, r_min: float, r_max: float, step: float, workers: int = 1,
          rtol: float = R_TOL, xtol: float = S_TOL) -> list:
    """s_mj sampled on an r grid, in grid order regardless of ``workers``."""
    rs = [float(r) for r in r_grid(r_min, r_max, step)]
    find_r_cr(k, rtol, xtol)
    point = lambda r: major_similarity_degree(k, r, rtol=rtol, xtol=xtol)  # noqa: E731
    if workers <= 1 or len(rs) < 2:
        return [point(r) for r in rs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, rs))


def jump_indices(points: list) -> list:
    """Rows where s_mj jumps: a tie row, or an s3 row directly after an s1 row."""
    out = []
    for i, p in enumerate(points):
        if p.branch == "tie" or p.branch == "s3" and i > 0 and points[i - 1].branch == "s1":
            out.append(i)
    return out


# -- brute-force oracle -------------------------------------------------------


class DenseRateGrid:
    """Rate function tabulated on a uniform s grid; argmax is a brute-force s_mj.

    Independent of r(s) and of every root finder in this module.
    """

    def __init__(self, k: int, points: int = 100_000, lo: float = 0.5, hi: float = SCAN_HI):
        self.k = k
        self.s = np.linspace(lo, hi, points)
        self.spacing = float(self.s[1] - self.s[0])
        self.h = np.asarray(analytic.entropy_h(self.s))
        self.g = np.asarray(analytic.log_penalty_g(k, self.s))

    def values(self, r: float) -> np.ndarray:
        return self.h - r * self.g

    def argmax(self, r: float) -> float:
        return float(self.s[np.argmax(self.values(r))])
