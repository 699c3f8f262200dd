"""Command-line entry point: thresholds, s_mj curves and Monte Carlo checks as CSV/JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import analytic, critical, lab
from .errors import BudgetError, DomainError, UnprovenRegimeError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_VERIFY_FAILED = 4
EXIT_UNPROVEN = 5

MIN_TOLERANCE = 1e-14


class UsageError(Exception):
    pass


# -- serialisation -------------------------------------------------------------


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(x) -> str:
    if x is None or isinstance(x, float) and not math.isfinite(x):
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        text = format(x, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(x, (int, str)):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(key))}: {_json_value(v)}" for key, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def render(rows: list, columns: list, meta: dict, fmt: str) -> str:
    if fmt == "json":
        body = {"meta": meta, "rows": [{c: row.get(c) for c in columns} for row in rows]}
        return _json_value(body) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_float(row.get(c)) if not isinstance(row.get(c), str) else row[c]
                         for c in columns])
    return buf.getvalue()


def emit(text: str, output) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


# -- argument helpers ------------------------------------------------------------


def parse_k_range(text: str) -> list:
    """'5', '5..7' or '5,7,9'."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            ks = list(range(lo, hi + 1))
        else:
            ks = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"bad k range {text!r}") from None
    if not ks:
        raise UsageError(f"empty k range {text!r}")
    return ks


def tolerances(args):
    if args.tolerance is None:
        return critical.R_TOL, critical.S_TOL
    if args.tolerance < MIN_TOLERANCE:
        raise UsageError(f"--tolerance must be >= {MIN_TOLERANCE:g}")
    return args.tolerance, args.tolerance


def meta_of(args) -> dict:
    # thread count and output destination do not affect results and stay out
    skip = {"func", "threads", "output"}
    return {key: v for key, v in sorted(vars(args).items()) if key not in skip}


# -- subcommands -------------------------------------------------------------------

THRESHOLD_COLUMNS = ["k", "s01", "s02", "s03", "r_s01", "r_s03", "r_cr", "s1cr", "s3cr",
                     "residual", "status", "message"]


def cmd_thresholds(args) -> int:
    rtol, xtol = tolerances(args)
    rows = []
    for k in parse_k_range(args.k):
        try:
            th = critical.find_r_cr(k, rtol, xtol)
        except UnprovenRegimeError as exc:
            rep = exc.report
            rows.append({"k": k, "status": "unproven",
                         "message": f"{exc} (r' sign changes: {rep.get('r_prime_sign_changes')}, "
                                    f"r'' sign changes: {rep.get('r_double_prime_sign_changes')})"})
            continue
        cp = th.critical
        rows.append({"k": k, "s01": cp.s01, "s02": cp.s02, "s03": cp.s03,
                     "r_s01": cp.r_at_s01, "r_s03": cp.r_at_s03, "r_cr": th.r_cr,
                     "s1cr": th.s1cr, "s3cr": th.s3cr, "residual": th.residual,
                     "status": "ok", "message": ""})
    emit(render(rows, THRESHOLD_COLUMNS, meta_of(args), args.format), args.output)
    if all(row["status"] != "ok" for row in rows):
        return EXIT_UNPROVEN
    return EXIT_OK


CURVE_COLUMNS = ["r", "s_mj", "s_mj_upper", "one_minus_s_mj", "branch", "f_s1", "f_s3", "jump"]


def curve_rows(points: list) -> list:
    jumps = set(critical.jump_indices(points))
    rows = []
    for i, p in enumerate(points):
        if isinstance(p.smj, tuple):
            lo, hi = p.smj
        else:
            lo, hi = p.smj, None
        rows.append({"r": p.r, "s_mj": lo, "s_mj_upper": hi, "one_minus_s_mj": p.smj_complement,
                     "branch": p.branch, "f_s1": p.f_s1, "f_s3": p.f_s3, "jump": int(i in jumps)})
    return rows


def cmd_curve(args) -> int:
    rtol, xtol = tolerances(args)
    if args.step <= 0:
        raise UsageError("--step must be positive")
    if args.r_min < 0 or args.r_max < args.r_min:
        raise UsageError("need 0 <= --r-min <= --r-max")
    points = critical.curve(args.k, args.r_min, args.r_max, args.step,
                            workers=args.threads, rtol=rtol, xtol=xtol)
    emit(render(curve_rows(points), CURVE_COLUMNS, meta_of(args), args.format), args.output)
    return EXIT_OK


VERIFY_COLUMNS = ["S", "s", "empirical_mean", "stderr", "exact", "z"]


def z_score(mean: float, exact: float, se: float) -> float:
    diff = mean - exact
    if se == 0:
        return 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return diff / se


def verdict(zs) -> bool:
    """All |z| <= 3, with at most one bucket tolerated in (3, 4)."""
    big = [abs(z) for z in zs if abs(z) > 3]
    return len(big) == 0 or len(big) == 1 and big[0] < 4


def cmd_verify(args) -> int:
    n, k, m = args.n, args.k, args.m
    if not 1 <= k <= n:
        raise UsageError("need 1 <= k <= n")
    if m < 0 or args.trials < 2:
        raise UsageError("need m >= 0 and trials >= 2")
    if n > lab.MAX_ENUM_VARS:
        raise BudgetError(f"enumeration is limited to n <= {lab.MAX_ENUM_VARS}; lower --n")
    if args.dump_instances:
        out = Path(args.dump_instances)
        out.mkdir(parents=True, exist_ok=True)
        for t in range(args.trials):
            formula = lab.trial_formula(n, k, m, args.seed, t)
            lab.write_dimacs(formula, out / f"trial_{t:05d}.cnf",
                             comment=f"random {k}-SAT n={n} m={m} seed={args.seed} trial={t}")
    mc = lab.monte_carlo_expected_histogram(n, k, m, args.trials, args.seed, workers=args.threads)
    rows = []
    for S in range(n + 1):
        exact = analytic.expected_sat_pairs_exact(n, k, m, S)
        mean, se = float(mc.mean[S]), float(mc.stderr[S])
        rows.append({"S": S, "s": S / n, "empirical_mean": mean, "stderr": se,
                     "exact": exact, "z": z_score(mean, exact, se)})
    passed = verdict([row["z"] for row in rows])
    meta = meta_of(args)
    meta["result"] = "pass" if passed else "fail"
    meta["max_abs_z"] = max(abs(row["z"]) for row in rows)
    emit(render(rows, VERIFY_COLUMNS, meta, args.format), args.output)
    print(f"verify: {'pass' if passed else 'fail'} (max |z| = {fmt_float(meta['max_abs_z'])})",
          file=sys.stderr)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


PAIRPROB_COLUMNS = ["n", "k", "m", "S", "clause_probability", "analytic", "log_analytic",
                    "oracle", "abs_diff", "single_sat_probability"]


def cmd_pairprob(args) -> int:
    n, k, m, S = args.n, args.k, args.m, args.S
    if not 1 <= k <= n:
        raise UsageError("need 1 <= k <= n")
    if not 0 <= S <= n:
        raise UsageError("need 0 <= S <= n")
    if m < 0:
        raise UsageError("need m >= 0")
    exact = analytic.clause_pair_agreement_fraction(n, k, S)
    value = float(exact**m)
    row = {"n": n, "k": k, "m": m, "S": S, "clause_probability": float(exact),
           "analytic": value,
           "log_analytic": analytic.log_pair_sat_probability_exact(n, k, m, S),
           "single_sat_probability": float(Fraction(2**k - 1, 2**k) ** m)}
    if n <= lab.MAX_ORACLE_VARS:
        oracle = lab.clause_pair_agreement_oracle(n, k, S)
        row["oracle"] = float(oracle**m)
        row["abs_diff"] = float(abs(exact**m - oracle**m))
    emit(render([row], PAIRPROB_COLUMNS, meta_of(args), args.format), args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksat-smj",
        description="Major-similarity-degree phase transition of random k-SAT.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=False):
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
        p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; output does not depend on this")
        if tol:
            p.add_argument("--tolerance", type=float, default=None,
                           help=f"root-finding tolerance in s and r (>= {MIN_TOLERANCE:g})")

    p = sub.add_parser("thresholds", help="s01, s02, s03, r_cr, s1cr, s3cr per k")
    p.add_argument("--k", default="5..10", help="k, lo..hi or comma list (default 5..10)")
    common(p, tol=True)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("curve", help="s_mj(r) on an r grid")
    p.add_argument("--k", type=int, required=True, help="clause width, at least 5")
    p.add_argument("--r-min", type=float, required=True, help="first clause density")
    p.add_argument("--r-max", type=float, required=True, help="last clause density (inclusive)")
    p.add_argument("--step", type=float, required=True, help="grid step, > 0")
    common(p, tol=True)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("verify", help="Monte Carlo pair histogram vs exact expectation")
    p.add_argument("--n", type=int, required=True, help="variables (enumeration budget: n <= 26)")
    p.add_argument("--k", type=int, required=True, help="clause width")
    p.add_argument("--m", type=int, required=True, help="clauses per instance")
    p.add_argument("--trials", type=int, default=200, help="random instances (default 200)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--dump-instances", metavar="DIR", default=None,
                   help="write each trial's formula as DIMACS CNF into DIR")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pairprob", help="pair satisfaction probability, analytic vs clause oracle")
    p.add_argument("--n", type=int, required=True, help="variables")
    p.add_argument("--k", type=int, required=True, help="clause width")
    p.add_argument("--m", type=int, required=True, help="clauses")
    p.add_argument("--S", type=int, required=True, help="similarity number, 0..n")
    common(p)
    p.set_defaults(func=cmd_pairprob)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnprovenRegimeError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_UNPROVEN
    except BudgetError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DomainError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
