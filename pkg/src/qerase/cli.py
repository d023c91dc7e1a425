"""CLI for qerase: discord reports, erasure scenarios, Monte Carlo campaigns and state-file checks."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, TextIO

import numpy as np
from pydantic import ValidationError

from . import __version__
from .core import Core
from .correlations import SUPPORTED_MEASURED_DIMS
from .ensembles import CAMPAIGN_CHECKS, STATE_FAMILIES, EnsembleConfig, MonteCarloSummary
from .error_handling import (
    InvalidParameterError,
    QEraseError,
    StateFileError,
    envelope_for_exception,
    normalize_run_id,
)
from .formats import StateFile, load_channel, load_state, read_json
from .ledger import EntropyLedger
from .qmath import DEFAULT_TOL

logger = logging.getLogger("qerase")

SEED_ENV = "QERASE_SEED"
# Deviations below this are rounding noise and not worth a finding
LINT_TOL = 1e-12


@dataclass
class Finding:
    id: str
    severity: str
    location: str
    message: str
    fix: str


SEVERITY_RANK = {"info": 1, "warning": 2, "error": 3}


def run_validate(path: str) -> list[Finding]:
    findings: list[Finding] = []

    try:
        state_file = StateFile.model_validate(read_json(path))
    except StateFileError as exc:
        location = exc.details[0]["field"] if exc.details else path
        return [
            Finding(
                id="QE001",
                severity="error",
                location=location,
                message=exc.message,
                fix="Write the file as JSON with keys dims, labels and matrix.",
            )
        ]
    except ValidationError as exc:
        for item in exc.errors():
            findings.append(
                Finding(
                    id="QE002",
                    severity="error",
                    location=".".join(str(p) for p in item.get("loc", ())) or path,
                    message=item.get("msg", "Invalid value"),
                    fix="Give one [re, im] pair per entry, a square matrix and one label per dimension.",
                )
            )
        return findings

    matrix = np.array([[complex(re, im) for re, im in row] for row in state_file.matrix])
    hermitian_defect = float(np.max(np.abs(matrix - matrix.conj().T)))
    trace = complex(np.trace(matrix))
    smallest = float(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[0])

    for id_, name, value, fix in (
        ("QE010", "Hermiticity defect", hermitian_defect, "Symmetrize the matrix: entry (j, i) must be the conjugate of (i, j)."),
        ("QE011", "Trace deviation", abs(trace - 1), "Divide the matrix by its trace."),
        ("QE012", "Negative eigenvalue", max(-smallest, 0.0), "Project onto the positive cone or regenerate the state."),
    ):
        if value > DEFAULT_TOL:
            findings.append(
                Finding(
                    id=id_,
                    severity="error",
                    location="matrix",
                    message=f"{name} {value:.3e} exceeds the tolerance {DEFAULT_TOL:.0e}.",
                    fix=fix,
                )
            )
        elif value > LINT_TOL:
            findings.append(
                Finding(
                    id=id_,
                    severity="warning",
                    location="matrix",
                    message=f"{name} {value:.3e} is accepted but above rounding level.",
                    fix=fix,
                )
            )

    if len(state_file.dims) != 2:
        findings.append(
            Finding(
                id="QE020",
                severity="warning",
                location="dims",
                message=f"State has {len(state_file.dims)} subsystems; discord and scenarios need exactly two.",
                fix="Trace out or merge subsystems so that the file describes an AB state.",
            )
        )
    else:
        for label, dim in zip(state_file.labels, state_file.dims):
            if dim not in SUPPORTED_MEASURED_DIMS:
                findings.append(
                    Finding(
                        id="QE021",
                        severity="info",
                        location=f"dims.{state_file.labels.index(label)}",
                        message=f"Subsystem {label!r} has dimension {dim}; discord cannot be measured on it.",
                        fix=f"Measure on a subsystem of dimension {list(SUPPORTED_MEASURED_DIMS)}.",
                    )
                )

    return findings


def _print_text(findings: list[Finding], path: str) -> None:
    if not findings:
        print(f"No findings. {path} is a valid state file.")
        return

    for finding in findings:
        print(f"{finding.id} [{finding.severity}] {finding.location}")
        print(f"{finding.message}")
        print(f"Fix: {finding.fix}\n")


def _exit_code(findings: list[Finding], fail_on: str) -> int:
    threshold = SEVERITY_RANK[fail_on]
    for finding in findings:
        if SEVERITY_RANK[finding.severity] >= threshold:
            return StateFileError.exit_code
    return 0


def _resolve_seed(seed: int) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or not raw.strip():
        return seed
    try:
        value = int(raw.strip())
    except ValueError:
        raise InvalidParameterError(f"{SEED_ENV}={raw!r} is not an integer") from None
    logger.info(f"[SEED] {SEED_ENV}={value} overrides --seed {seed}")
    return value


def _float_list(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidParameterError(f"expected comma-separated numbers, got {text!r}") from None


def _dims(text: str) -> tuple[int, int]:
    try:
        parts = [int(part) for part in text.split(",")]
    except ValueError:
        raise InvalidParameterError(f"--dims expects two comma-separated integers, got {text!r}") from None
    if len(parts) != 2:
        raise InvalidParameterError(f"--dims expects two comma-separated integers, got {text!r}")
    return parts[0], parts[1]


def _build_core(args: argparse.Namespace) -> Core:
    core = Core()
    core.tinker(
        grid_resolution=args.grid,
        random_restarts=args.restarts,
        convergence_tol=args.tol,
        seed=_resolve_seed(args.seed),
    )
    return core


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def cmd_discord(args: argparse.Namespace) -> int:
    core = _build_core(args)
    state = load_state(args.state)
    report = core.discord(state, args.side)
    payload = {
        "state": {"path": args.state, "dims": list(state.dims.dims), "labels": list(state.labels)},
        "seed": core.optimizer.seed,
        "tool_version": __version__,
        **report.to_dict(),
    }
    _emit(json.dumps(payload, indent=2), args.out)
    return 0


def cmd_scenario(args: argparse.Namespace) -> int:
    core = _build_core(args)
    core.tinker(temperature=args.temperature)
    state = load_state(args.state)

    params: dict[str, Any] = {}
    if args.name in {"thermalize", "landauer"}:
        params["beta"] = args.beta
    if args.name == "bleach":
        params["dist"] = _float_list(args.dist)
    if args.name == "thermalize":
        params["energies"] = _float_list(args.energies)
    if args.name == "landauer":
        params["bath_gap"] = args.bath_gap
        params["purify_bath"] = args.purify_bath
    if args.name == "kraus":
        if args.channel is None:
            raise InvalidParameterError("scenario 'kraus' needs --channel")
        channel = load_channel(args.channel)
        params["kraus"] = [[[[z.real, z.imag] for z in row] for row in k] for k in channel.kraus_ops]
        params["env_dim"] = args.env_dim

    result = core.run(args.name, state, **params)
    report = core.report(result, state)
    _emit(report.model_dump_json(indent=2), args.out)
    if not result.all_checks_hold:
        logger.warning(f"[SCENARIO] {args.name} violated {list(result.violations)}")
        return 5
    return 0


def inject_violation(ledger: EntropyLedger) -> EntropyLedger:
    """Corrupt a ledger so the erasure bound fails; used by --self-test-violation."""
    return dataclasses.replace(ledger, delta_D=ledger.delta_D + ledger.delta_S_T + 1.0)


CSV_LEDGER_FIELDS = ("delta_D", "delta_S_T", "delta_I", "delta_J", "I_SE_after", "optimizer_slack")


def write_montecarlo_csv(summary: MonteCarloSummary, stream: TextIO) -> None:
    """One row per trial, then a '#' footer; floats use repr so output is byte-stable."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        ["trial", "rank", "kraus_count", *CSV_LEDGER_FIELDS, *(f"margin_{c}" for c in CAMPAIGN_CHECKS), "violations", "error"]
    )
    for record in summary.records:
        if record.ledger is None:
            writer.writerow([record.trial, "", "", *[""] * (len(CSV_LEDGER_FIELDS) + len(CAMPAIGN_CHECKS)), "", record.error])
            continue
        ledger = record.ledger
        values = [repr(float(getattr(ledger, f))) for f in CSV_LEDGER_FIELDS]
        margins = {c.name: (repr(c.margin) if c.applicable else "") for c in record.checks}
        writer.writerow(
            [
                record.trial,
                record.rank,
                record.kraus_count,
                *values,
                *(margins.get(c, "") for c in CAMPAIGN_CHECKS),
                ";".join(record.violated),
                "",
            ]
        )
    stream.write(
        f"# summary trials={summary.trials} seed={summary.seed} violations={summary.total_violations} "
        f"failures={summary.failures} artifacts={summary.artifacts}\n"
    )
    stream.write("# violations " + " ".join(f"{k}={v}" for k, v in summary.violations.items()) + "\n")
    stream.write("# min_margin " + " ".join(f"{k}={v!r}" for k, v in summary.min_margins.items()) + "\n")
    stream.write(f"# slack mean={summary.slack_mean!r} max={summary.slack_max!r}\n")


def cmd_montecarlo(args: argparse.Namespace) -> int:
    core = _build_core(args)
    dim_A, dim_B = _dims(args.dims)
    cfg = EnsembleConfig(
        seed=core.optimizer.seed,
        dim_A=dim_A,
        dim_B=dim_B,
        env_dim=args.env_dim if args.env_dim is not None else max(args.kraus, dim_B),
        kraus_count=args.kraus,
        trials=args.trials,
        state_family=args.family,
        workers=args.workers,
    )
    channel = load_channel(args.channel) if args.channel else None
    hook = inject_violation if args.self_test_violation else None
    summary = core.montecarlo(cfg, channel=channel, ledger_hook=hook)

    buffer = io.StringIO()
    write_montecarlo_csv(summary, buffer)
    if args.out is None:
        sys.stdout.write(buffer.getvalue())
    else:
        Path(args.out).write_text(buffer.getvalue(), encoding="utf-8")
    return 0 if summary.ok else 5


def cmd_validate(args: argparse.Namespace) -> int:
    fail_on = "warning" if args.strict else args.fail_on
    findings = run_validate(args.state)

    if args.format == "json":
        print(json.dumps([asdict(item) for item in findings], indent=2))
    else:
        _print_text(findings, args.state)

    return _exit_code(findings, fail_on)


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, default=64, help="Grid resolution per measurement angle.")
    parser.add_argument("--restarts", type=int, default=8, help="Random restarts of the Nelder-Mead refinement.")
    parser.add_argument("--tol", type=float, default=1e-7, help="Optimizer convergence tolerance in bits.")
    parser.add_argument("--seed", type=int, default=0, help=f"Seed; {SEED_ENV} overrides it when set.")


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s %(message)s")
    logger.setLevel(level)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qerase")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs.")
    parser.add_argument("--run-id", default=None, help="Identifier echoed in error envelopes.")
    sub = parser.add_subparsers(dest="command")

    discord_cmd = sub.add_parser("discord", help="Report mutual information, classical correlation and discord.")
    discord_cmd.add_argument("--state", required=True)
    discord_cmd.add_argument("--side", default="B", help="Label of the measured subsystem.")
    discord_cmd.add_argument("--out", default=None)
    _add_optimizer_flags(discord_cmd)

    scenario = sub.add_parser("scenario", help="Run a named erasure process and check every bound.")
    scenario.add_argument("name", choices=[s.get_name() for s in Core().get_registered_scenarios()])
    scenario.add_argument("--state", required=True)
    scenario.add_argument("--beta", type=float, default=None)
    scenario.add_argument("--dist", default=None, help="Comma-separated hiding distribution for bleach.")
    scenario.add_argument("--energies", default=None, help="Comma-separated spectrum of H_B for thermalize.")
    scenario.add_argument("--bath-gap", type=float, default=None, help="Level spacing of the bath for landauer.")
    scenario.add_argument("--purify-bath", action="store_true", help="Purify the thermal bath into a register R.")
    scenario.add_argument("--channel", default=None, help="Kraus channel file for the kraus scenario.")
    scenario.add_argument("--env-dim", type=int, default=None)
    scenario.add_argument("--temperature", type=float, default=300.0, help="Bath temperature in K for work figures.")
    scenario.add_argument("--out", default=None)
    _add_optimizer_flags(scenario)

    montecarlo = sub.add_parser(
        "montecarlo", help="Monte Carlo campaign over random states and channels; exits 5 on any violation or crashed trial."
    )
    montecarlo.add_argument("--trials", type=int, default=100)
    montecarlo.add_argument("--dims", default="2,2", help="dim_A,dim_B")
    montecarlo.add_argument("--kraus", type=int, default=4, help="Largest number of Kraus operators sampled.")
    montecarlo.add_argument("--env-dim", type=int, default=None)
    montecarlo.add_argument("--family", choices=list(STATE_FAMILIES), default="random")
    montecarlo.add_argument("--workers", type=int, default=1)
    montecarlo.add_argument("--channel", default=None, help="Force this Kraus channel file on every trial.")
    montecarlo.add_argument("--self-test-violation", action="store_true", help="Corrupt every ledger to test the exit code.")
    montecarlo.add_argument("--out", default=None)
    _add_optimizer_flags(montecarlo)

    validate = sub.add_parser("validate", help="Lint a state file.")
    validate.add_argument("--state", required=True)
    validate.add_argument("--strict", action="store_true", help="Alias for --fail-on warning")
    validate.add_argument("--format", choices=["text", "json"], default="text")
    validate.add_argument("--fail-on", choices=["error", "warning", "info"], default="error")

    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return 0

    _configure_logging(args.verbose)
    handlers = {
        "discord": cmd_discord,
        "scenario": cmd_scenario,
        "montecarlo": cmd_montecarlo,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except QEraseError as exc:
        exit_code, envelope = envelope_for_exception(exc, normalize_run_id(args.run_id))
        print(json.dumps(envelope, indent=2), file=sys.stderr)
        return exit_code
    except Exception as exc:
        logger.exception(f"[ERROR] {args.command} failed")
        exit_code, envelope = envelope_for_exception(exc, normalize_run_id(args.run_id))
        print(json.dumps(envelope, indent=2), file=sys.stderr)
        return exit_code


if __name__ == "__main__":
    raise SystemExit(main())
