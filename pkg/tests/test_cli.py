import json
import os
import subprocess
import sys

import pytest

from opmx.cli import SuiteConfig, run_suite

FAST = dict(truncations=(6,), samples=20, witness_nmax=2000)


def _run_cli(args, env_extra=None):
    env = dict(os.environ)
    env.pop("OPMX_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "opmx.cli", *args],
                          capture_output=True, text=True, env=env)


def test_run_suite_all_matches():
    code, reports = run_suite(SuiteConfig(**FAST))
    assert code == 0
    assert all(r["match"] for r in reports)
    cases = {r["case"] for r in reports}
    assert len(cases) == 7


def test_exit_one_on_tampered_expectations(tmp_path):
    expect = tmp_path / "expect.json"
    expect.write_text(json.dumps({"case_IV": {"strict_gap": "fail"}}))
    code, reports = run_suite(SuiteConfig(cases=("case_IV",),
                                          expect_path=str(expect), **FAST))
    assert code == 1
    tampered = [r for r in reports if r["check"] == "strict_gap"]
    assert tampered and not tampered[0]["match"]


def test_exit_two_on_malformed_definition(tmp_path):
    bad = tmp_path / "op.json"
    bad.write_text(json.dumps({"diag": {"num": "oops"}}))
    result = _run_cli(["--define", str(bad)])
    assert result.returncode == 2
    assert "diag" in result.stderr


def test_exit_two_on_bad_flag_values():
    result = _run_cli(["--truncation", "0"])
    assert result.returncode == 2
    result = _run_cli(["--truncation", "abc"])
    assert result.returncode == 2


def test_define_runs_generic_checks(tmp_path):
    op = {"name": "scaled_shift", "diag": {"num": [1, 1], "den": [1]}}
    path = tmp_path / "op.json"
    path.write_text(json.dumps(op))
    result = _run_cli(["--define", str(path), "--truncation", "5",
                       "--samples", "10"])
    assert result.returncode == 0, result.stderr
    reports = [json.loads(line) for line in result.stdout.splitlines()]
    checks = {r["check"] for r in reports}
    assert "pairing" in checks and "transpose@5" in checks
    assert all(r["match"] for r in reports)


def test_json_output_is_deterministic():
    args = ["--case", "case_IV,e1_row", "--truncation", "6", "--samples", "15",
            "--witness-nmax", "2000"]
    first = _run_cli(args)
    second = _run_cli(args)
    assert first.returncode == second.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout.strip(), "expected NDJSON output"
    for line in first.stdout.splitlines():
        json.loads(line)


def test_reports_sorted_by_case_and_check():
    result = _run_cli(["--case", "all", "--truncation", "4", "--samples", "5",
                       "--witness-nmax", "1500"])
    assert result.returncode == 0
    keys = [(json.loads(line)["case"], json.loads(line)["check"])
            for line in result.stdout.splitlines()]
    assert keys == sorted(keys)


def test_env_seed_overrides_default_only():
    args = ["--case", "case_IV", "--truncation", "4", "--samples", "10"]
    default_run = _run_cli(args)
    env_run = _run_cli(args, env_extra={"OPMX_SEED": "7"})
    flag_run = _run_cli([*args, "--seed", "7"])
    flag_beats_env = _run_cli([*args, "--seed", "42"],
                              env_extra={"OPMX_SEED": "7"})
    assert env_run.stdout == flag_run.stdout
    assert flag_beats_env.stdout == default_run.stdout


def test_text_format_summarizes():
    result = _run_cli(["--case", "case_IV", "--truncation", "4", "--samples",
                       "5", "--format", "text"])
    assert result.returncode == 0
    assert "MATCH" in result.stdout
    assert "checks matched" in result.stdout.splitlines()[-1]


def test_invalid_config_rejected():
    with pytest.raises(Exception):
        run_suite(SuiteConfig(truncations=(), samples=5))
