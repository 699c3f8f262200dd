"""Random k-SAT instances, exhaustive solving and pair-similarity statistics.

These are the brute-force counterparts of the analytic formulas: every
expectation in :mod:`ksat_smj.analytic` can be reproduced here by drawing
formulas and enumerating all 2^n assignments.

Assignments are encoded as integers with bit ``l`` holding the value of
variable ``l``.  Randomness comes from numpy's PCG64 seeded through
``SeedSequence``; trial ``t`` of a Monte Carlo run with seed ``seed`` uses
``SeedSequence(seed, spawn_key=(t,))``, so each trial is reproducible on its
own and independent of how trials are scheduled.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analytic import round_half_up
from .errors import BudgetError, DomainError

MAX_ENUM_VARS = 26
MAX_ORACLE_VARS = 14
MAX_HIST_SOLUTIONS = 200_000
_ENUM_BLOCK = 1 << 20
_PAIR_BLOCK = 1 << 22


@dataclass(frozen=True)
class Clause:
    vars: tuple
    polarities: tuple

    def literals(self) -> list:
        """DIMACS literals (1-based, negative for negated variables)."""
        return [v + 1 if p else -(v + 1) for v, p in zip(self.vars, self.polarities)]


@dataclass(frozen=True)
class Assignment:
    bits: tuple

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    def to_int(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    @classmethod
    def from_int(cls, x: int, n: int) -> "Assignment":
        return cls(tuple(bool((int(x) >> i) & 1) for i in range(n)))

    def complement(self) -> "Assignment":
        return Assignment(tuple(not b for b in self.bits))


class Formula:
    """Conjunction of ``m`` clauses, each over ``k`` distinct variables of ``n``.

    Stored as two read-only (m, k) arrays: variable indices and polarities
    (True for a positive literal).
    """

    def __init__(self, n: int, k: int, variables, polarities):
        variables = np.array(variables, dtype=np.int64).reshape(-1, k)
        polarities = np.array(polarities, dtype=bool).reshape(-1, k)
        if variables.shape != polarities.shape:
            raise DomainError("variable and polarity arrays differ in shape")
        if variables.size and (variables.min() < 0 or variables.max() >= n):
            raise DomainError(f"variable index outside [0, {n})")
        srt = np.sort(variables, axis=1)
        if k > 1 and np.any(srt[:, 1:] == srt[:, :-1]):
            raise DomainError("clause repeats a variable")
        variables.setflags(write=False)
        polarities.setflags(write=False)
        self.n, self.k = n, k
        self.variables, self.polarities = variables, polarities

    @property
    def m(self) -> int:
        return self.variables.shape[0]

    @property
    def clauses(self) -> list:
        return [Clause(tuple(int(v) for v in vs), tuple(bool(p) for p in ps))
                for vs, ps in zip(self.variables, self.polarities)]

    @classmethod
    def from_clauses(cls, n: int, k: int, clauses: Sequence[Clause]) -> "Formula":
        return cls(n, k, [c.vars for c in clauses], [c.polarities for c in clauses])

    def masks(self):
        """Per-clause (positive, negative) variable bit masks as uint64 arrays."""
        if self.n > 63:
            raise BudgetError(f"bit-mask encoding needs n <= 63, got {self.n}")
        weights = np.left_shift(np.uint64(1), self.variables.astype(np.uint64))
        pos = np.where(self.polarities, weights, np.uint64(0)).sum(axis=1, dtype=np.uint64)
        neg = np.where(self.polarities, np.uint64(0), weights).sum(axis=1, dtype=np.uint64)
        return pos, neg

    def __eq__(self, other):
        return (isinstance(other, Formula) and (self.n, self.k) == (other.n, other.k)
                and np.array_equal(self.variables, other.variables)
                and np.array_equal(self.polarities, other.polarities))

    def __repr__(self):
        return f"Formula(n={self.n}, k={self.k}, m={self.m})"


@dataclass(frozen=True)
class PairHistogram:
    counts: tuple
    num_solutions: int

    @property
    def n(self) -> int:
        return len(self.counts) - 1


@dataclass(frozen=True)
class MonteCarloHistogram:
    mean: np.ndarray
    stderr: np.ndarray
    trials: int


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(trial,))


def generate_random_ksat(n: int, k: int, m: int, seed) -> Formula:
    """Draw ``m`` clauses independently and with replacement.

    Each clause picks its k variables by a partial Fisher-Yates shuffle of
    0..n-1 and then k independent fair polarity bits.
    """
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if m < 0:
        raise DomainError(f"need m >= 0, got {m}")
    rng = _rng(seed)
    perm = np.tile(np.arange(n, dtype=np.int64), (m, 1))
    rows = np.arange(m)
    for i in range(k):
        j = rng.integers(i, n, size=m)
        perm[rows, i], perm[rows, j] = perm[rows, j], perm[rows, i].copy()
    polarities = rng.integers(0, 2, size=(m, k)).astype(bool)
    return Formula(n, k, perm[:, :k], polarities)


def trial_formula(n: int, k: int, m: int, seed: int, trial: int) -> Formula:
    return generate_random_ksat(n, k, m, trial_seed(seed, trial))


def _bits_of(assignment, n: int) -> np.ndarray:
    bits = np.asarray(getattr(assignment, "bits", assignment), dtype=bool).ravel()
    if bits.size != n:
        raise DomainError(f"assignment has length {bits.size}, formula has n={n}")
    return bits


def evaluate(formula: Formula, assignment) -> bool:
    """True iff every clause has a literal made true by ``assignment``."""
    bits = _bits_of(assignment, formula.n)
    if formula.m == 0:
        return True
    return bool(np.all(np.any(bits[formula.variables] == formula.polarities, axis=1)))


def solution_codes(formula: Formula) -> np.ndarray:
    """Integer codes of all satisfying assignments, ascending."""
    n = formula.n
    if n > MAX_ENUM_VARS:
        raise BudgetError(f"enumeration is limited to n <= {MAX_ENUM_VARS}, got n={n}")
    pos, neg = formula.masks()
    total = 1 << n
    found = []
    for start in range(0, total, _ENUM_BLOCK):
        x = np.arange(start, min(start + _ENUM_BLOCK, total), dtype=np.uint64)
        ok = np.ones(x.size, dtype=bool)
        for p, q in zip(pos, neg):
            # violated iff every positive var is 0 and every negative var is 1
            ok &= ((x & p) != 0) | ((x & q) != q)
        found.append(x[ok])
    return np.concatenate(found) if found else np.empty(0, dtype=np.uint64)


def enumerate_solutions(formula: Formula) -> list:
    return [Assignment.from_int(int(x), formula.n) for x in solution_codes(formula)]


def _codes(solutions, n: int) -> np.ndarray:
    if isinstance(solutions, np.ndarray):
        return solutions.astype(np.uint64)
    out = []
    for a in solutions:
        if isinstance(a, (int, np.integer)):
            out.append(int(a))
        else:
            bits = _bits_of(a, n)
            out.append(int(np.dot(bits.astype(np.uint64), np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64)))))
    return np.array(out, dtype=np.uint64)


def pair_similarity_histogram(solutions, n: int) -> PairHistogram:
    """Ordered-pair counts (self-pairs included) by similarity number."""
    codes = _codes(solutions, n)
    size = codes.size
    if size > MAX_HIST_SOLUTIONS:
        raise BudgetError(
            f"{size} solutions exceeds the pair-histogram limit of {MAX_HIST_SOLUTIONS}; "
            "use fewer variables or more clauses"
        )
    counts = np.zeros(n + 1, dtype=np.int64)
    if size:
        rows = max(1, _PAIR_BLOCK // size)
        for start in range(0, size, rows):
            diff = np.bitwise_count(codes[start:start + rows, None] ^ codes[None, :])
            counts += np.bincount(n - diff.ravel().astype(np.int64), minlength=n + 1)
    return PairHistogram(tuple(int(c) for c in counts), size)


def _trial_histogram(n, k, m, seed, t) -> np.ndarray:
    formula = trial_formula(n, k, m, seed, t)
    return np.array(pair_similarity_histogram(solution_codes(formula), n).counts, dtype=np.int64)


def monte_carlo_expected_histogram(n: int, k: int, m: int, trials: int, seed: int,
                                   workers: int = 1) -> MonteCarloHistogram:
    """Per-S sample mean and standard error of the satisfying-pair histogram."""
    if trials < 2:
        raise DomainError(f"need at least 2 trials, got {trials}")
    if n > MAX_ENUM_VARS:
        raise BudgetError(f"enumeration is limited to n <= {MAX_ENUM_VARS}, got n={n}")
    job = lambda t: _trial_histogram(n, k, m, seed, t)  # noqa: E731
    if workers <= 1:
        hists = [job(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hists = list(pool.map(job, range(trials)))
    data = np.stack(hists).astype(float)
    mean = data.mean(axis=0)
    stderr = data.std(axis=0, ddof=1) / math.sqrt(trials)
    return MonteCarloHistogram(mean=mean, stderr=stderr, trials=trials)


def clause_pair_agreement_oracle(n: int, k: int, S: int,
                                 pair: Optional[tuple] = None) -> Fraction:
    """Fraction of all C(n,k) 2^k clauses satisfied by both members of a pair
    agreeing on exactly ``S`` variables, by exhaustive enumeration.

    Without ``pair`` the all-false assignment is paired with one that is true
    on the last n - S variables.
    """
    if k < 1 or k > n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0 <= S <= n:
        raise DomainError(f"similarity number {S} outside [0, {n}]")
    if n > MAX_ORACLE_VARS:
        raise BudgetError(f"clause-space oracle is limited to n <= {MAX_ORACLE_VARS}, got n={n}")
    if pair is None:
        a = np.zeros(n, dtype=bool)
        b = a.copy()
        b[S:] = True
    else:
        a, b = _bits_of(pair[0], n), _bits_of(pair[1], n)
        if int(np.count_nonzero(a == b)) != S:
            raise DomainError("supplied pair does not agree on exactly S variables")
    var_sets = np.array(list(itertools.combinations(range(n), k)), dtype=np.int64)
    patterns = np.array(list(itertools.product((False, True), repeat=k)), dtype=bool)
    sat_a = np.any(a[var_sets][:, None, :] == patterns[None, :, :], axis=2)
    sat_b = np.any(b[var_sets][:, None, :] == patterns[None, :, :], axis=2)
    both = int(np.count_nonzero(sat_a & sat_b))
    return Fraction(both, sat_a.size)


def estimate_sat_probability(n: int, k: int, r: float, trials: int, seed: int):
    """Fraction of random instances at ratio ``r`` that are satisfiable, with a
    95% normal-approximation half-width."""
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    m = round_half_up(r * n)
    sat = 0
    for t in range(trials):
        if solution_codes(trial_formula(n, k, m, seed, t)).size:
            sat += 1
    p = sat / trials
    return p, 1.96 * math.sqrt(p * (1 - p) / trials)


# -- DIMACS -------------------------------------------------------------------


def to_dimacs(formula: Formula, comment: Optional[str] = None) -> str:
    lines = [f"c {line}" for line in (comment or "").splitlines()]
    lines.append(f"p cnf {formula.n} {formula.m}")
    for vs, ps in zip(formula.variables, formula.polarities):
        lits = [str(int(v) + 1 if p else -(int(v) + 1)) for v, p in zip(vs, ps)]
        lines.append(" ".join(lits) + " 0")
    return "\n".join(lines) + "\n"


def write_dimacs(formula: Formula, path, comment: Optional[str] = None) -> None:
    Path(path).write_text(to_dimacs(formula, comment))


def parse_dimacs(text: str) -> Formula:
    """Read a DIMACS CNF whose clauses all have the same length."""
    n = m = None
    literals = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            n, m = int(fields[2]), int(fields[3])
            continue
        literals.extend(int(tok) for tok in line.split())
    if n is None:
        raise ValueError("missing 'p cnf' header")
    clauses, cur = [], []
    for lit in literals:
        if lit == 0:
            clauses.append(cur)
            cur = []
        else:
            cur.append(lit)
    if cur:
        raise ValueError("last clause is not 0-terminated")
    if len(clauses) != m:
        raise ValueError(f"header declares {m} clauses, found {len(clauses)}")
    lengths = {len(c) for c in clauses}
    if len(lengths) > 1:
        raise ValueError("clauses have mixed lengths")
    k = lengths.pop() if lengths else 1
    variables = [[abs(x) - 1 for x in c] for c in clauses]
    polarities = [[x > 0 for x in c] for c in clauses]
    return Formula(n, k, np.array(variables, dtype=np.int64).reshape(-1, k),
                   np.array(polarities, dtype=bool).reshape(-1, k))
