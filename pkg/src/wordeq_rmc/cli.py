#!/usr/bin/env python3
"""
Word Equation RMC - Command Line Interface

Sub-commands:
  solve   decide one constraint file and print sat / unsat / unknown
  bench   solve every file in a directory and write a CSV summary
  oracle  bounded brute-force search for a model
"""

import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

try:
    from . import __version__
    from .config import Mode, SolverSettings
    from .engine import solve_problem
    from .errors import InputError, InternalSolverError, WordEqError
    from .models import OracleOutcome, SolveResult, Verdict
    from .oracle import brute_force
    from .parsing import parse_file
except ImportError:
    from __init__ import __version__
    from config import Mode, SolverSettings
    from engine import solve_problem
    from errors import InputError, InternalSolverError, WordEqError
    from models import OracleOutcome, SolveResult, Verdict
    from oracle import brute_force
    from parsing import parse_file

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3
CSV_FIELDS = ["instance", "verdict", "iterations", "time_ms", "peak_states"]
MODE_CHOICES = ["quadratic", "cubic", "complete", "cubic-cut", "quad"]


def setup_logging(verbosity: int) -> None:
    """Route log records to stderr through rich; stdout stays reserved for answers."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def exit_codes(ctx: click.Context):
    """Map library errors onto the documented exit codes."""
    try:
        yield
    except (InputError, ValidationError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    except InternalSolverError as e:
        click.echo(f"internal error: {e}", err=True)
        ctx.exit(EXIT_INTERNAL_ERROR)
    except WordEqError as e:
        click.echo(f"internal error: {e}", err=True)
        ctx.exit(EXIT_INTERNAL_ERROR)


@click.group()
@click.version_option(__version__, prog_name="wordeq-rmc")
@click.option("-v", "--verbose", count=True, help="Increase log detail (-v info, -vv debug).")
def cli(verbose: int) -> None:
    """Word equation solver based on regular model checking."""
    setup_logging(verbose)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--mode", type=click.Choice(MODE_CHOICES, case_sensitive=False), default=None,
              help="Solving mode; chosen automatically when omitted.")
@click.option("--timeout", "timeout_s", type=float, default=None, help="Wall-clock budget in seconds.")
@click.option("--iters", "max_iterations", type=int, default=None, help="Iteration budget.")
@click.option("--trace", "trace_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Directory for per-iteration automata dumps.")
@click.option("--model", "show_model", is_flag=True, help="Print the model of a sat answer.")
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON after the verdict.")
@click.pass_context
def solve(ctx, path: Path, mode: Optional[str], timeout_s: Optional[float], max_iterations: Optional[int],
          trace_dir: Optional[Path], show_model: bool, as_json: bool) -> None:
    """Decide the constraint in PATH."""
    with exit_codes(ctx):
        settings = SolverSettings.from_env(mode=Mode(mode) if mode else None, timeout_s=timeout_s,
                                           max_iterations=max_iterations, trace_dir=trace_dir)
        problem = parse_file(path)
        result = solve_problem(problem, settings)
        click.echo(result.verdict.value)
        if show_model and result.verdict == Verdict.SAT:
            for line in result.model_lines():
                click.echo(line)
        if as_json:
            click.echo(result.model_dump_json(indent=2))


def _bench_one(path: Path, settings: SolverSettings) -> Dict[str, str]:
    try:
        result = solve_problem(parse_file(path), settings)
    except WordEqError as e:
        logger.warning(f"{path.name}: {e}")
        return {"instance": path.name, "verdict": "error", "iterations": "0", "time_ms": "0.0", "peak_states": "0"}
    return {
        "instance": path.name,
        "verdict": result.verdict.value,
        "iterations": str(result.iterations),
        "time_ms": f"{result.time_ms:.1f}",
        "peak_states": str(result.peak_states),
    }


def _summary_table(rows: Sequence[Dict[str, str]]) -> Table:
    table = Table(title="Benchmark summary")
    table.add_column("Verdict")
    table.add_column("Instances", justify="right")
    table.add_column("Time (ms)", justify="right")
    for verdict in ("sat", "unsat", "unknown", "error"):
        chosen = [r for r in rows if r["verdict"] == verdict]
        if chosen:
            total = sum(float(r["time_ms"]) for r in chosen)
            table.add_row(verdict, str(len(chosen)), f"{total:.1f}")
    return table


@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write rows here instead of stdout.")
@click.option("--mode", type=click.Choice(MODE_CHOICES, case_sensitive=False), default=None)
@click.option("--timeout", "timeout_s", type=float, default=None)
@click.option("--iters", "max_iterations", type=int, default=None)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker threads.")
@click.pass_context
def bench(ctx, directory: Path, csv_path: Optional[Path], mode: Optional[str], timeout_s: Optional[float],
          max_iterations: Optional[int], jobs: int) -> None:
    """Solve every instance in DIRECTORY."""
    with exit_codes(ctx):
        settings = SolverSettings.from_env(mode=Mode(mode) if mode else None, timeout_s=timeout_s,
                                           max_iterations=max_iterations)
        instances = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
        logger.info(f"Benchmarking {len(instances)} instances with {jobs} workers")
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            rows: List[Dict[str, str]] = list(pool.map(lambda p: _bench_one(p, settings), instances))
        rows.sort(key=lambda r: r["instance"])
        if csv_path is not None:
            with open(csv_path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=CSV_FIELDS)
                writer.writeheader()
                writer.writerows(rows)
        else:
            writer = csv.DictWriter(sys.stdout, fieldnames=CSV_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
        Console(stderr=True).print(_summary_table(rows))


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--maxlen", type=int, default=4, show_default=True, help="Longest value tried per variable.")
@click.option("--nodes", "node_limit", type=int, default=None, help="Assignment limit.")
@click.pass_context
def oracle(ctx, path: Path, maxlen: int, node_limit: Optional[int]) -> None:
    """Search for a model of PATH by brute force."""
    with exit_codes(ctx):
        settings = SolverSettings.from_env(oracle_node_limit=node_limit)
        result = brute_force(parse_file(path), maxlen, settings.oracle_node_limit)
        if result.outcome == OracleOutcome.SAT:
            click.echo("sat")
            for line in SolveResult(verdict=Verdict.SAT, model=result.model).model_lines():
                click.echo(line)
        elif result.outcome == OracleOutcome.CAP:
            click.echo("unknown")
            click.echo(f"; node limit reached after {result.nodes} assignments")
        else:
            click.echo("unknown")
            click.echo(f"; no model with values up to length {maxlen}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Application entry point."""
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="wordeq-rmc",
                        standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        click.echo(f"internal error: {e}", err=True)
        return EXIT_INTERNAL_ERROR
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
