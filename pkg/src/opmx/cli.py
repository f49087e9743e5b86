"""Command-line suite runner.

Replays gallery cases, or a user-supplied operator/matrix JSON definition,
at chosen truncations and emits one verification report per check.  Reports
stream as newline-delimited JSON (or aligned text), sorted by case and check
name, so two runs with the same configuration and seed are byte identical.

Exit codes: 0 when every report matches its expected verdict, 1 on any
mismatch, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import gallery
from .calculus import (
    ColOp,
    OpMatrix,
    RowOp,
    col_formal_adjoint,
    composite_from_json,
    matrix_formal_adjoint,
    row_adjoint,
)
from .errors import InvalidDefinition, NotDenselyDefined, OpmxError
from .operators import StructuredOperator, formal_adjoint_op, is_bounded
from .seqspace import Truncation
from .verify import (
    PASS,
    UNDECIDED,
    VerificationReport,
    check_compression_transpose,
    check_pairing,
    denseness_obstruction,
)

DEFAULT_SEED = 42


@dataclass
class SuiteConfig:
    cases: tuple[str, ...] = ("all",)
    truncations: tuple[int, ...] = (64,)
    tol: float = 1e-10
    samples: int = 200
    seed: int = DEFAULT_SEED
    fmt: str = "json"
    define_path: str | None = None
    expect_path: str | None = None
    witness_nmax: int = 10_000

    def validate(self) -> None:
        if not self.truncations or any(n < 1 for n in self.truncations):
            raise InvalidDefinition("truncation: every value must be >= 1")
        if self.tol <= 0:
            raise InvalidDefinition("tol: must be positive")
        if self.samples < 0:
            raise InvalidDefinition("samples: must be >= 0")
        if self.fmt not in ("json", "text"):
            raise InvalidDefinition("format: expected json or text")


def _selected_cases(config: SuiteConfig) -> list[str]:
    if any(c == "all" for c in config.cases):
        return list(gallery.CASE_NAMES)
    return list(config.cases)


def _load_expectations(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidDefinition(f"expect: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidDefinition(f"expect: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidDefinition("expect: expected an object of case -> check -> verdict")
    return data


def _apply_expectations(case: str, reports, overrides: dict) -> None:
    per_case = overrides.get(case, {})
    if not isinstance(per_case, dict):
        raise InvalidDefinition(f"expect.{case}: expected an object")
    for rep in reports:
        base = rep.check.split("@", 1)[0]
        override = per_case.get(rep.check, per_case.get(base))
        if override is not None:
            rep.with_expected(str(override))


def _define_reports(config: SuiteConfig) -> list[tuple[str, VerificationReport]]:
    with open(config.define_path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidDefinition(f"definition: invalid JSON: {exc}") from exc
    target = composite_from_json(payload, "definition")
    if isinstance(target, StructuredOperator):
        adjoint = formal_adjoint_op(target)
        entries = (target,)
    elif isinstance(target, RowOp):
        adjoint = row_adjoint(target)
        entries = target.entries
    elif isinstance(target, ColOp):
        adjoint = col_formal_adjoint(target)
        entries = target.entries
    else:
        adjoint = matrix_formal_adjoint(target)
        entries = tuple(op for row in target.grid for op in row)

    reports: list[tuple[str, VerificationReport]] = []
    try:
        rep = check_pairing(target, adjoint, samples=config.samples,
                            seed=config.seed)
        rep.check = "pairing"
        rep.with_expected(PASS)
    except OpmxError as exc:
        rep = VerificationReport("pairing", UNDECIDED,
                                 certificate={"reason": str(exc)})
        rep.with_expected(UNDECIDED)
    reports.append(("user", rep))
    for n in config.truncations:
        rep = check_compression_transpose(target, adjoint, Truncation(n))
        rep.check = f"transpose@{n}"
        rep.with_expected(PASS)
        reports.append(("user", rep))
    bounded = [is_bounded(op).value for op in entries]
    rep = VerificationReport("boundedness", PASS,
                             certificate={"entries": bounded})
    rep.with_expected(PASS)
    reports.append(("user", rep))
    if isinstance(target, (ColOp, OpMatrix, StructuredOperator)):
        try:
            if isinstance(target, StructuredOperator):
                from .operators import domain_of

                dens = denseness_obstruction(domain_of(formal_adjoint_op(target)))
            elif isinstance(target, ColOp):
                dens = denseness_obstruction(col_formal_adjoint(target)
                                             .block_domains[0])
            else:
                dens = denseness_obstruction(matrix_formal_adjoint(target)
                                             .column_domains[0])
            dens.check = "adjoint_denseness"
            dens.with_expected(dens.verdict)  # informational
            reports.append(("user", dens))
        except NotDenselyDefined as exc:
            rep = VerificationReport("adjoint_denseness", UNDECIDED,
                                     certificate={"reason": str(exc)})
            rep.with_expected(UNDECIDED)
            reports.append(("user", rep))
    return reports


def run_suite(config: SuiteConfig) -> tuple[int, list[dict]]:
    """Run the configured checks; returns (exit_code, report objects)."""
    config.validate()
    overrides = _load_expectations(config.expect_path) if config.expect_path else {}
    tagged: list[tuple[str, VerificationReport]] = []
    if config.define_path:
        tagged.extend(_define_reports(config))
    else:
        params = gallery.RunParams(truncations=tuple(config.truncations),
                                   samples=config.samples, seed=config.seed,
                                   tol=config.tol,
                                   witness_nmax=config.witness_nmax)
        for name in _selected_cases(config):
            case = gallery.build_case(name)
            reports = case.run(params)
            _apply_expectations(case.name, reports, overrides)
            tagged.extend((case.name, r) for r in reports)
    tagged.sort(key=lambda cr: (cr[0], cr[1].check))
    out = []
    for case_name, rep in tagged:
        obj = {"case": case_name}
        obj.update(rep.to_json())
        out.append(obj)
    ok = all(r["match"] for r in out)
    return (0 if ok else 1), out


def _emit(reports: list[dict], fmt: str, stream) -> None:
    if fmt == "json":
        for obj in reports:
            stream.write(json.dumps(obj, sort_keys=True, separators=(",", ":")))
            stream.write("\n")
        return
    width = max((len(f"{r['case']}/{r['check']}") for r in reports), default=0)
    for r in reports:
        tag = "MATCH" if r["match"] else "MISMATCH"
        name = f"{r['case']}/{r['check']}".ljust(width)
        stream.write(f"{name}  {r['verdict']:<9} expected={r['expected']:<9} {tag}\n")
    matched = sum(1 for r in reports if r["match"])
    stream.write(f"{matched}/{len(reports)} checks matched\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opmx",
        description="Replay operator-matrix verification cases and emit reports.")
    parser.add_argument("--case", default="all",
                        help="gallery case name, or 'all' (default)")
    parser.add_argument("--truncation", default="64",
                        help="comma-separated compression sizes, e.g. 4,64,256")
    parser.add_argument("--tol", type=float, default=1e-10,
                        help="relative tolerance for rank decisions")
    parser.add_argument("--samples", type=int, default=200,
                        help="random sample count per pairing check")
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default 42; OPMX_SEED overrides the default)")
    parser.add_argument("--format", dest="fmt", default="json",
                        choices=("json", "text"), help="output format")
    parser.add_argument("--define", dest="define_path", default=None,
                        help="path to an operator/matrix JSON definition to check")
    parser.add_argument("--expect", dest="expect_path", default=None,
                        help="path to a JSON file overriding expected verdicts")
    parser.add_argument("--witness-nmax", type=int, default=10_000,
                        help="largest witness parameter for the vanishing families")
    return parser


def _resolve_seed(arg_seed: int | None) -> int:
    if arg_seed is not None:
        return arg_seed
    env = os.environ.get("OPMX_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise InvalidDefinition(f"OPMX_SEED: not an integer: {env!r}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        truncations = tuple(int(x) for x in str(args.truncation).split(","))
    except ValueError:
        print("error: truncation: expected comma-separated integers",
              file=sys.stderr)
        return 2
    try:
        config = SuiteConfig(
            cases=tuple(args.case.split(",")),
            truncations=truncations,
            tol=args.tol,
            samples=args.samples,
            seed=_resolve_seed(args.seed),
            fmt=args.fmt,
            define_path=args.define_path,
            expect_path=args.expect_path,
            witness_nmax=args.witness_nmax,
        )
        code, reports = run_suite(config)
    except (InvalidDefinition, OpmxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(reports, config.fmt, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
