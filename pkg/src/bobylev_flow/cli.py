"""
Command Line Interface for bobylev-flow.

Provides four subcommands:

* ``bobylev-flow run``: evolve a scenario and write monitors, checkpoints,
  the diagnostics report and the run metadata.
* ``bobylev-flow presets``: list the scenario catalog.
* ``bobylev-flow plotdata``: project one functional of a report to plain columns.
* ``bobylev-flow validate``: schema-check a configuration (or print the schema).

Global flags (``--out``, ``--verbose``, ``--log-path``, ``--version``)
are shared across all subcommands. Relative paths are resolved against ``--out``.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from bobylev_flow.classes import RunConfig
from bobylev_flow.config import Config
from bobylev_flow.constants import TOOL_NAME
from bobylev_flow.diagnostics.regions import Band, RegionSpec
from bobylev_flow.diagnostics.report import load_report, series_table
from bobylev_flow.diagnostics.runner import DiagnosticsRunner
from bobylev_flow.evolution import IntegrationAbort, Trajectory, TrajectoryWriter, evolve
from bobylev_flow.measures import MeasureSpec, measure_from_data
from bobylev_flow.presets import build_measure, get_preset, presets
from common.config_utils import write_json
from common.constants import EXIT_FAILURE, EXIT_NUMERICAL, EXIT_OK, EXIT_SCHEMA
from common.logger import Logger
from common.utils import format_float, log_banner, resolve_workers
from common.version import get_dependency_versions, get_version


class UsageError(Exception):
    """Invalid configuration or input; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="bobylev-flow - Fourier-space solver and verification suite for the "
                    "non-cutoff homogeneous Boltzmann equation with Maxwellian molecules",
        epilog="Use 'bobylev-flow <command> --help' for subcommand details.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {get_version()}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose logging")
    parser.add_argument(
        "--log-path",
        help="Custom directory for log files (default: ~/.bobylev-flow/logs/)",
    )
    parser.add_argument(
        "--out",
        default=None,
        help="Output directory; relative paths of all subcommands resolve against it",
    )

    subparsers = parser.add_subparsers(dest="command")

    run_parser = subparsers.add_parser(
        "run",
        help="Evolve a scenario and compute its diagnostics",
        description="Run one scenario. Without --config the built-in defaults are used.",
    )
    run_parser.add_argument("--config", type=str, default=None, help="Path to a run configuration JSON")
    run_parser.add_argument("--scenario", type=str, default=None, help="Scenario preset name")
    run_parser.add_argument("--t-end", type=float, default=None, help="Final time")
    run_parser.add_argument("--run-id", type=str, default=None, help="Prefix of every written file")
    run_parser.add_argument(
        "--no-diagnostics",
        action="store_true",
        help="Only evolve; skip the diagnostics report",
    )

    subparsers.add_parser("presets", help="List the scenario presets")

    plot_parser = subparsers.add_parser(
        "plotdata",
        help="Emit one report functional as whitespace-separated columns",
        description="Project a functional of a diagnostics report onto plain text columns.",
    )
    plot_parser.add_argument("report", type=str, help="Path to <run_id>_report.json")
    plot_parser.add_argument("functional", type=str, help="Series name, e.g. decay_exponent or coercivity")
    plot_parser.add_argument("--output", type=str, default=None, help="Write to this file instead of stdout")

    validate_parser = subparsers.add_parser(
        "validate",
        help="Validate a run configuration against the schema",
        description="Validate a configuration (the standard one when --config is omitted).",
    )
    validate_parser.add_argument("--config", type=str, default=None, help="Path to a run configuration JSON")
    validate_parser.add_argument("--schema", action="store_true", help="Print the JSON schema and exit")

    return parser


def _resolve(path: str | Path, out: str | None) -> Path:
    path = Path(path)
    if out is not None and not path.is_absolute():
        return Path(out) / path
    return path


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if args.scenario is not None:
        overrides["scenario"] = args.scenario
    if args.t_end is not None:
        overrides["evolution"] = {"t_end": args.t_end}
    if args.run_id is not None:
        overrides["run_id"] = args.run_id
    if args.no_diagnostics:
        overrides["diagnostics"] = {"enabled": False}
    if args.out is not None:
        overrides["output"] = args.out
    return overrides


def _load_run_config(logger: Logger, args: argparse.Namespace) -> RunConfig:
    """
    Resolve the run configuration: file (or defaults) plus command line overrides.

    Raises:
        UsageError: On a missing or malformed file or a schema violation.
    """
    try:
        if args.config is None:
            return RunConfig.model_validate(_overrides(args))
        return Config(logger, _resolve(args.config, args.out)).to_settings(_overrides(args))
    except ValidationError as e:
        raise UsageError(f"Configuration does not match the schema:\n{e}") from e
    except (FileNotFoundError, ValueError) as e:
        raise UsageError(str(e)) from e


def _initial_measure(settings: RunConfig) -> tuple[MeasureSpec, RegionSpec, tuple[float, float, float]]:
    try:
        if settings.measure is not None:
            measure = measure_from_data(settings.measure)
            default_region: RegionSpec = Band(a1=1.0, a2=2.0)
            axis = (0.0, 0.0, 1.0)
        else:
            scenario = get_preset(settings.scenario)
            measure = build_measure(settings.scenario)
            default_region, axis = scenario.region(), scenario.axis
        region = settings.diagnostics.region_spec() or default_region
    except (OSError, ValueError) as e:
        raise UsageError(f"Invalid initial measure: {e}") from e
    return measure, region, axis


def _write_error(out_dir: Path, run_id: str, kind: str, message: str, exit_code: int) -> Path:
    return write_json(
        out_dir / f"{run_id}_error.json",
        {"status": "error", "kind": kind, "message": message, "exit_code": exit_code},
    )


def _run(logger: Logger, args: argparse.Namespace) -> int:
    settings = _load_run_config(logger, args)
    out_dir = Path(settings.output)
    run_id = str(settings.run_id)
    args.resolved = (out_dir, run_id)
    measure, region, axis = _initial_measure(settings)

    kernel = settings.kernel.to_kernel()
    grid = settings.grid.to_grid()
    quad = settings.quadrature.to_quadrature()
    diagnostics = settings.diagnostics
    extra_times: list[float] = []
    if diagnostics.enabled:
        extra_times = [*diagnostics.coercivity_times, *diagnostics.gap_times, *diagnostics.entropy_times]
    config = settings.evolution.to_config(kernel, grid, quad, extra_times)
    workers = resolve_workers(settings.evolution.workers)

    log_banner(logger, TOOL_NAME, get_version(), {
        "Scenario": settings.label,
        "Run id": run_id,
        "Output": str(out_dir),
        "Kernel": f"s={kernel.s:g} K={kernel.K:g} {kernel.profile_name}"
                  + (f" cutoff={kernel.cutoff_level:g}" if kernel.is_cutoff else ""),
        "Grid": f"{grid.N}^3, R_max={grid.R_max:g}",
        "t_end": f"{config.t_end:g}",
        "Workers": str(workers),
    })

    metadata: dict[str, Any] = {
        "run_id": run_id,
        "scenario": settings.label,
        "config": settings.model_dump(mode="json"),
        "versions": get_dependency_versions(),
        "workers": workers,
        "kernel": kernel.describe(),
        "grid": grid.describe(),
        "quadrature": quad.describe(),
        "checkpoint_times": list(config.checkpoint_times),
    }
    trajectory: Trajectory | None = None
    artifacts: list[Path] = []
    status = "ok"
    try:
        with TrajectoryWriter(logger, out_dir, run_id) as writer:
            try:
                with logger.phase("evolution"):
                    trajectory = evolve(measure, config, logger=logger, writer=writer)
            finally:
                artifacts += [writer.monitors_path, *writer.checkpoints]

        if diagnostics.enabled:
            with logger.phase("diagnostics"):
                runner = DiagnosticsRunner(logger, diagnostics, kernel, quad, workers=settings.evolution.workers)
                report = runner.run(
                    trajectory, measure, region, run_id=run_id, scenario=settings.label, axis=axis, seed=settings.seed
                )
                if diagnostics.contraction:
                    runner.contraction(report, measure, config)
                runner.refinement(report, trajectory, measure, region, config, axis)
                artifacts += report.write(out_dir)
    except IntegrationAbort as e:
        status = "aborted"
        if e.trajectory is not None:
            trajectory = e.trajectory
        artifacts.append(_write_error(out_dir, run_id, "IntegrationAbort", str(e), EXIT_NUMERICAL))
        logger.error(f"Run aborted; last good field at t = {e.last_good.time:.6g} retained")
        return EXIT_NUMERICAL
    finally:
        metadata["status"] = status
        metadata["policy"] = trajectory.policy if trajectory is not None else None
        metadata["timings"] = logger.timings
        metadata["artifacts"] = [path.name for path in artifacts]
        write_json(out_dir / f"{run_id}_metadata.json", metadata)

    logger.info(f"Run {run_id} finished; {len(artifacts)} artifact(s) in {out_dir}")
    return EXIT_OK


def _plotdata(args: argparse.Namespace) -> int:
    try:
        report = load_report(_resolve(args.report, args.out))
        series = series_table(report, args.functional)
    except (FileNotFoundError, ValueError) as e:
        raise UsageError(str(e)) from e
    lines = ["# " + " ".join(series.columns)]
    lines += [" ".join(format_float(value) for value in row) for row in series.rows]
    text = "\n".join(lines) + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        target = _resolve(args.output, args.out)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    return EXIT_OK


def _validate(logger: Logger, args: argparse.Namespace) -> int:
    if args.schema:
        sys.stdout.write(json.dumps(RunConfig.model_json_schema(), indent=2) + "\n")
        return EXIT_OK
    try:
        config = Config(logger, None if args.config is None else _resolve(args.config, args.out))
        config.to_settings()
    except ValidationError as e:
        raise UsageError(f"Configuration {args.config or 'at the standard location'} is invalid:\n{e}") from e
    except (FileNotFoundError, ValueError) as e:
        raise UsageError(str(e)) from e
    logger.info(f"Configuration {config.path} is valid")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """Entry point for the ``bobylev-flow`` CLI."""

    parser = _build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_FAILURE

    quiet = args.command in ("presets", "plotdata") or (args.command == "validate" and args.schema)
    logger = Logger(
        "bobylev_flow",
        args.log_path,
        level=logging.DEBUG if args.verbose else logging.INFO,
        console=not quiet,
    )

    try:
        if args.command == "presets":
            for name in presets():
                sys.stdout.write(f"{name}\t{get_preset(name).description}\n")
            return EXIT_OK
        if args.command == "plotdata":
            return _plotdata(args)
        if args.command == "validate":
            return _validate(logger, args)
        return _run(logger, args)
    except UsageError as exc:
        logger.error(str(exc))
        print(f"[{TOOL_NAME}] Error: {exc}", file=sys.stderr)
        if args.command == "run":
            _record_failure(args, "UsageError", str(exc), EXIT_SCHEMA)
        return EXIT_SCHEMA
    except Exception as exc:  # pragma: no cover
        logger.exception(f"Unexpected failure: {exc}")
        print(f"[{TOOL_NAME}] Error: {exc}", file=sys.stderr)
        if args.command == "run":
            _record_failure(args, type(exc).__name__, str(exc), EXIT_FAILURE)
        return EXIT_FAILURE


def _record_failure(args: argparse.Namespace, kind: str, message: str, exit_code: int) -> None:
    """Error record for a run that failed before or outside time stepping."""
    out_dir, run_id = getattr(args, "resolved", (Path(args.out or "runs"), args.run_id or args.scenario or "run"))
    try:
        _write_error(out_dir, run_id, kind, message, exit_code)
    except OSError:
        pass


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
