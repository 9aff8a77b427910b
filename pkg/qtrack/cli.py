#!/usr/bin/env python3
"""qtrack CLI - build graphs, run trajectories and ensembles, validate."""

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .core import ExitCode, Orchestrator, QTrackError, get_settings
from .core.config import load_config_file
from .core.manifest import RunManifest
from .core.suite import CheckStatus, SuiteResult
from .metrics import snapshots_to_csv
from .montecarlo import ExperimentConfig, TrajectoryResult, run_ensemble_async, run_trajectory
from .stabilizer.codes import CODE_CATALOG, build_error_graph, get_code, write_graph_csv
from .suites import default_suites

console = Console()

STATUS_STYLE = {
    CheckStatus.PASSED: "[green]PASS[/green]",
    CheckStatus.FAILED: "[red]FAIL[/red]",
    CheckStatus.ERROR: "[red]ERROR[/red]",
}


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to the usage exit code."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(ExitCode.USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="qtrack", description="Continuous-time quantum error tracking simulator"
    )
    parser.add_argument("--version", action="version", version=f"qtrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("build-graph", help="Export a code's error graph as CSV")
    graph.add_argument("code", help=f"Code id ({', '.join(sorted(CODE_CATALOG))})")
    graph.add_argument("--out-dir", type=Path, help="Output directory")

    for name, help_text in (
        ("trajectory", "Simulate one trajectory and export its series"),
        ("ensemble", "Run ensembles at every kappa/Gamma point of the config"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, help="Experiment TOML or run manifest JSON")
        cmd.add_argument("--seed", type=int, help="Override the master seed")
        cmd.add_argument("--out-dir", type=Path, help="Output directory")
        cmd.add_argument("--emit-stride", type=int, help="Emit every n-th grid step")
        if name == "trajectory":
            cmd.add_argument("--index", type=int, default=0, help="Trajectory index")
        else:
            cmd.add_argument("--workers", type=int, help="Worker processes")

    validate = sub.add_parser("validate", help="Run a validation suite")
    validate.add_argument("suite", nargs="?", help="Suite id; omit to list suites")
    return parser


def load_experiment(args: argparse.Namespace) -> ExperimentConfig:
    """
    Merge the config file with command-line overrides.

    Raises:
        ConfigError: if the file cannot be read
        ValidationError: if a field is invalid
    """
    data: dict[str, Any] = load_config_file(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.emit_stride is not None:
        data["emit_stride"] = args.emit_stride
    return ExperimentConfig.model_validate(data)


def _out_dir(args: argparse.Namespace) -> Path:
    out = args.out_dir or get_settings().out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_build_graph(args: argparse.Namespace) -> int:
    code = get_code(args.code)
    out = _out_dir(args)
    graph = build_error_graph(code)
    path = write_graph_csv(graph, out / f"graph-{code.name}.csv")

    table = Table(title=f"{code.name} error graph")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", justify="right")
    for key, value in graph.stats().items():
        table.add_row(key, str(value))
    console.print(table)

    manifest = RunManifest(command="build-graph", config={"code": code.name})
    manifest.add_output(path, out)
    manifest.write(out / "manifest.json")
    return ExitCode.OK


def _write_outcomes(result: TrajectoryResult, path: Path) -> Path:
    lines = ["policy,correction,truth,success"]
    for policy, correction in result.corrections.items():
        success = int(result.success[policy])
        lines.append(f"{policy},{correction.label},{result.truth.label},{success}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_diagnostics(diagnostics: dict[str, Any], out: Path) -> Path:
    path = out / "diagnostics.json"
    path.write_text(json.dumps(diagnostics, indent=2, default=str) + "\n", encoding="utf-8")
    return path


def cmd_trajectory(args: argparse.Namespace) -> int:
    cfg = load_experiment(args).resolve()
    out = _out_dir(args)
    result = run_trajectory(cfg, args.index, keep_record=True)

    manifest = RunManifest(
        command=f"trajectory --index {args.index}",
        config=cfg.model_dump(mode="json"),
        seed=cfg.seed,
    )
    if result.failed:
        path = _write_diagnostics({"index": args.index, **result.diagnostics}, out)
        console.print(f"[red]Numerical failure[/red]: diagnostics in {path}")
        manifest.add_output(path, out)
        manifest.write(out / "manifest.json")
        return ExitCode.NUMERICAL

    code = get_code(cfg.code)
    outputs = [
        snapshots_to_csv(result.snapshots, out / "metrics.csv"),
        result.trajectory.to_csv(out / "filter.csv"),
        result.path.to_csv(out / "truth.csv", [ch.label for ch in code.error_channels]),
        result.record.to_csv(out / "record.csv"),
        _write_outcomes(result, out / "outcomes.csv"),
    ]
    for path in outputs:
        manifest.add_output(path, out)
    manifest.write(out / "manifest.json")

    final = result.snapshots[-1]
    verdicts = ", ".join(
        f"{policy} {'ok' if ok else 'failed'}" for policy, ok in result.success.items()
    )
    console.print(
        Panel.fit(
            f"[bold]{cfg.code}[/bold] seed {cfg.seed} index {args.index}\n"
            f"{result.path.n_events} error events, truth {result.truth.label}\n"
            f"J = {final.J:.4f}, p* = {final.p_star:.4f} at t = {final.t:.4g}\n"
            f"Recovery: {verdicts}",
            title="Trajectory",
            border_style="blue",
        )
    )
    return ExitCode.OK


async def cmd_ensemble(args: argparse.Namespace) -> int:
    base = load_experiment(args).resolve()
    out = _out_dir(args)
    workers = args.workers or get_settings().workers
    manifest = RunManifest(command="ensemble", config=base.model_dump(mode="json"), seed=base.seed)

    table = Table(title=f"{base.code} ensembles, N = {base.trajectories}")
    table.add_column("kappa/Gamma", justify="right")
    table.add_column("mean J(T)", justify="right")
    table.add_column("se", justify="right")
    table.add_column("optimal", justify="right")
    table.add_column("naive", justify="right")
    table.add_column("failed", justify="right")

    points = [base.at_ratio(r).resolve() for r in base.sweep] or [base]
    for cfg in points:
        summary = await run_ensemble_async(cfg, workers)
        ratio = cfg.kappa_over_total_rate
        label = f"{ratio:g}" if ratio is not None else "inf"
        manifest.add_output(summary.to_csv(out / f"summary-kG{label}.csv"), out)
        table.add_row(
            label,
            f"{summary.mean_bound[-1]:.4f}",
            f"{summary.se_bound[-1]:.4f}",
            f"{summary.success_rates['optimal']:.3f}",
            f"{summary.success_rates['naive']:.3f}",
            str(summary.failed),
        )

    console.print(table)
    manifest.write(out / "manifest.json")
    return ExitCode.OK


def _show_suites(orchestrator: Orchestrator) -> None:
    lines = [f"[bold]{s['name']}[/bold]: {s['description']}" for s in orchestrator.list_suites()]
    console.print(Panel("\n".join(lines), title="Validation suites", border_style="cyan"))


def _show_result(result: SuiteResult) -> None:
    table = Table(title=f"{result.suite}")
    table.add_column("Check", style="bold")
    table.add_column("Status")
    table.add_column("Measured", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Detail", style="dim")
    for check in result.checks:
        table.add_row(
            check.name,
            STATUS_STYLE[check.status],
            "" if check.measured is None else f"{check.measured:.3e}",
            "" if check.tolerance is None else f"{check.tolerance:.1e}",
            check.detail,
        )
    console.print(table)


async def cmd_validate(args: argparse.Namespace) -> int:
    orchestrator = Orchestrator()
    for suite in default_suites():
        orchestrator.register(suite)

    if not args.suite:
        _show_suites(orchestrator)
        return ExitCode.OK

    result = await orchestrator.run(args.suite)
    _show_result(result)
    if not result.passed:
        console.print(f"[red]{len(result.failures)} check(s) failed[/red]")
        return ExitCode.VALIDATION
    return ExitCode.OK


async def dispatch(args: argparse.Namespace) -> int:
    if args.command == "build-graph":
        return cmd_build_graph(args)
    if args.command == "trajectory":
        return cmd_trajectory(args)
    if args.command == "ensemble":
        return await cmd_ensemble(args)
    return await cmd_validate(args)


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, run the command and map errors to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return int(asyncio.run(dispatch(args)))
    except ValidationError as e:
        for error in e.errors():
            field = ".".join(str(part) for part in error["loc"]) or "config"
            console.print(f"[red]Invalid config[/red] {field}: {error['msg']}")
        return ExitCode.USAGE
    except QTrackError as e:
        console.print(f"[red]Error[/red]: {e}")
        if e.exit_code == ExitCode.NUMERICAL and args.command in ("trajectory", "ensemble"):
            diagnostics = {"error": str(e), **getattr(e, "diagnostics", {})}
            _write_diagnostics(diagnostics, _out_dir(args))
        return e.exit_code


def main() -> None:
    """Entry point."""
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        sys.exit(ExitCode.USAGE)


if __name__ == "__main__":
    main()
