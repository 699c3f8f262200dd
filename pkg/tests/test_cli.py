import csv
import io
import json
import subprocess
import sys

import pytest

from ksat_smj import cli, critical


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_thresholds_rows(capsys):
    code, out, _ = run(capsys, "thresholds", "--k", "5..7")
    assert code == cli.EXIT_OK
    rows = read_csv(out)
    assert [int(r["k"]) for r in rows] == [5, 6, 7]
    assert all(float(r["residual"]) <= 1e-9 for r in rows)
    assert float(rows[0]["r_cr"]) == critical.find_r_cr(5).r_cr


def test_thresholds_unproven(capsys):
    code, out, _ = run(capsys, "thresholds", "--k", "4")
    assert code == cli.EXIT_UNPROVEN
    row = read_csv(out)[0]
    assert row["status"] == "unproven" and row["r_cr"] == ""
    code, out, _ = run(capsys, "thresholds", "--k", "4..5")
    assert code == cli.EXIT_OK
    assert [r["status"] for r in read_csv(out)] == ["unproven", "ok"]


def test_thresholds_json_matches_csv(capsys):
    _, out_csv, _ = run(capsys, "thresholds", "--k", "5,6")
    _, out_json, _ = run(capsys, "thresholds", "--k", "5,6", "--format", "json")
    doc = json.loads(out_json)
    assert doc["meta"]["k"] == "5,6"
    for row_csv, row_json in zip(read_csv(out_csv), doc["rows"]):
        for key in ("s01", "s02", "s03", "r_s01", "r_s03", "r_cr", "s1cr", "s3cr", "residual"):
            assert float(row_csv[key]) == row_json[key]


def test_floats_use_17_digits():
    assert cli.fmt_float(0.1) == "0.10000000000000001"
    assert cli.fmt_float(None) == ""
    assert cli.fmt_float(3) == "3"
    assert cli._json_value({"a": 1.0, "b": None}) == '{"a": 1, "b": null}'.replace("1,", "1.0,")


def test_tolerance_flag(capsys):
    code, _, err = run(capsys, "thresholds", "--k", "5", "--tolerance", "1e-15")
    assert code == cli.EXIT_USAGE and "tolerance" in err
    code, out, _ = run(capsys, "thresholds", "--k", "5", "--tolerance", "1e-6")
    assert code == cli.EXIT_OK
    assert float(read_csv(out)[0]["r_cr"]) == pytest.approx(critical.find_r_cr(5).r_cr, abs=1e-5)


def test_bad_k_range(capsys):
    code, _, _ = run(capsys, "thresholds", "--k", "five")
    assert code == cli.EXIT_USAGE


def test_curve_below_bracket(capsys):
    cp = critical.find_extrema(5)
    code, out, _ = run(capsys, "curve", "--k", "5", "--r-min", "0", "--r-max", str(cp.r_at_s03 - 0.1),
                       "--step", "0.5")
    assert code == cli.EXIT_OK
    rows = read_csv(out)
    assert {r["branch"] for r in rows} == {"s1"}
    assert all(r["jump"] == "0" for r in rows)
    assert all(r["f_s3"] == "" for r in rows)


def test_curve_flags_one_jump(capsys):
    th = critical.find_r_cr(5)
    code, out, _ = run(capsys, "curve", "--k", "5", "--r-min", repr(th.r_cr - 0.0505),
                       "--r-max", repr(th.r_cr + 0.05), "--step", "1e-3")
    assert code == cli.EXIT_OK
    rows = read_csv(out)
    flagged = [i for i, r in enumerate(rows) if r["jump"] == "1"]
    assert len(flagged) == 1
    i = flagged[0]
    size = float(rows[i]["s_mj"]) - float(rows[i - 1]["s_mj"])
    assert size == pytest.approx(th.s3cr - th.s1cr, abs=0.01)


def test_curve_empty_range(capsys):
    code, out, _ = run(capsys, "curve", "--k", "5", "--r-min", "3", "--r-max", "3", "--step", "0.1")
    assert code == cli.EXIT_OK
    assert out.strip().splitlines() == [",".join(cli.CURVE_COLUMNS)]


def test_curve_unproven_k(capsys):
    code, _, _ = run(capsys, "curve", "--k", "4", "--r-min", "0", "--r-max", "1", "--step", "0.5")
    assert code == cli.EXIT_UNPROVEN


def test_verify_zero_clauses(capsys):
    code, out, err = run(capsys, "verify", "--n", "8", "--k", "3", "--m", "0", "--trials", "3")
    assert code == cli.EXIT_OK
    assert all(float(r["z"]) == 0.0 for r in read_csv(out))
    assert "pass" in err


def test_verify_budget(capsys):
    code, _, err = run(capsys, "verify", "--n", "30", "--k", "3", "--m", "10", "--trials", "2")
    assert code == cli.EXIT_BUDGET
    assert "--n" in err


def test_verify_failure_exit(capsys):
    # only 2 trials: buckets that never occur have zero stderr but nonzero expectation
    code, _, _ = run(capsys, "verify", "--n", "10", "--k", "3", "--m", "60", "--trials", "2", "--seed", "1")
    assert code == cli.EXIT_VERIFY_FAILED


def test_verdict_rule():
    assert cli.verdict([0.1, -2.9, 3.0])
    assert cli.verdict([0.1, 3.5])
    assert not cli.verdict([3.5, -3.2])
    assert not cli.verdict([4.1])


def test_verify_dump_instances(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "--n", "8", "--k", "3", "--m", "10", "--trials", "3",
                     "--seed", "5", "--dump-instances", str(tmp_path))
    assert code in (cli.EXIT_OK, cli.EXIT_VERIFY_FAILED)
    files = sorted(tmp_path.glob("*.cnf"))
    assert len(files) == 3
    from ksat_smj import lab
    assert lab.parse_dimacs(files[1].read_text()) == lab.trial_formula(8, 3, 10, 5, 1)


def test_verify_json_meta(capsys):
    code, out, _ = run(capsys, "verify", "--n", "8", "--k", "3", "--m", "0", "--trials", "3",
                       "--format", "json", "--threads", "2")
    doc = json.loads(out)
    assert doc["meta"]["result"] == "pass"
    assert "threads" not in doc["meta"]
    assert len(doc["rows"]) == 9


def test_pairprob_exact_agreement(capsys):
    code, out, _ = run(capsys, "pairprob", "--n", "10", "--k", "5", "--m", "20", "--S", "7")
    assert code == cli.EXIT_OK
    row = read_csv(out)[0]
    assert float(row["abs_diff"]) == 0.0
    assert row["analytic"] == row["oracle"]


def test_pairprob_identical_pair(capsys):
    _, out, _ = run(capsys, "pairprob", "--n", "9", "--k", "4", "--m", "13", "--S", "9")
    row = read_csv(out)[0]
    assert float(row["analytic"]) == pytest.approx((15 / 16) ** 13, rel=1e-14)
    assert row["analytic"] == row["single_sat_probability"]


def test_pairprob_no_oracle_above_budget(capsys):
    _, out, _ = run(capsys, "pairprob", "--n", "40", "--k", "5", "--m", "100", "--S", "30")
    row = read_csv(out)[0]
    assert row["oracle"] == "" and row["abs_diff"] == ""


def test_pairprob_usage_error(capsys):
    code, _, _ = run(capsys, "pairprob", "--n", "10", "--k", "5", "--m", "20", "--S", "11")
    assert code == cli.EXIT_USAGE


def test_argparse_usage_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["curve", "--k", "5"])
    assert info.value.code == cli.EXIT_USAGE


def test_output_file(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "thresholds", "--k", "5", "--output", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("k,s01")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ksat_smj", "thresholds", "--k", "5"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("k,s01")
