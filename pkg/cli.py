#!/usr/bin/env python3
"""
Command-line interface for the Riemannian center of mass solver.
"""

import csv
from pathlib import Path
from typing import Optional

import typer

from config.logging import setup_logging
from config.settings import get_settings
from main import CenterOfMassOrchestrator
from manifolds.exceptions import CenterOfMassError
from schemas.models import BallCheckMode, ConvergenceReport, SolverStatus


app = typer.Typer(
    name="rcom",
    help="Riemannian center of mass of weighted points on model spaces",
    add_completion=False
)

INPUT_ERROR_EXIT = 1
STATUS_EXIT_CODES = {
    SolverStatus.CONVERGED: 0,
    SolverStatus.BALL_VIOLATION: 2,
    SolverStatus.CUT_LOCUS: 3,
    SolverStatus.MAX_ITERATIONS_REACHED: 4,
}
TRACE_HEADER = ["iteration", "gradient_norm", "frechet_value"]

SPEC_ARGUMENT = typer.Argument(..., help="Path to the JSON problem file")
STEP_SCALE_OPTION = typer.Option(None, "--step-scale", help="Fraction of the Euler step, in (0, 1]")
TOLERANCE_OPTION = typer.Option(None, "--tolerance", help="Stop once the vector field norm is below this value")
BALL_CHECK_OPTION = typer.Option(None, "--ball-check", help="Admissible ball handling", case_sensitive=False)
VERBOSE_OPTION = typer.Option(False, "--verbose", "-v", help="Enable debug logging on stderr")


def _setup(verbose: bool):
    settings = get_settings()
    return setup_logging("DEBUG" if verbose else settings.log_level, settings.log_dir)


def _solver_overrides(step_scale: Optional[float], tolerance: Optional[float],
                      ball_check: Optional[BallCheckMode]) -> dict:
    return {"step_scale": step_scale, "tolerance": tolerance, "ball_check": ball_check}


def _fail(message: str):
    typer.echo(f"Error: {message}", err=True)
    raise typer.Exit(INPUT_ERROR_EXIT)


def _write_trace(path: str, report: ConvergenceReport) -> None:
    trace_path = Path(path)
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    with open(trace_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for entry in report.trace:
            writer.writerow([entry.iteration, repr(entry.gradient_norm), repr(entry.frechet_value)])


@app.command()
def mean(
    spec_file: str = SPEC_ARGUMENT,
    trace: Optional[str] = typer.Option(None, "--trace", help="Write the per-iteration trace as CSV to this path"),
    step_scale: Optional[float] = STEP_SCALE_OPTION,
    tolerance: Optional[float] = TOLERANCE_OPTION,
    ball_check: Optional[BallCheckMode] = BALL_CHECK_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Compute the Riemannian center of mass of a problem file."""
    logger = _setup(verbose)
    orchestrator = CenterOfMassOrchestrator()
    try:
        problem = orchestrator.load_problem(spec_file, _solver_overrides(step_scale, tolerance, ball_check))
        result, report = orchestrator.run_mean(problem)
    except CenterOfMassError as e:
        logger.error(f"mean failed: {e}")
        _fail(str(e))

    if trace:
        _write_trace(trace, report)
    typer.echo(result.model_dump_json(indent=2))
    if report.status != SolverStatus.CONVERGED:
        typer.echo(f"Solver stopped with status {report.status.value}: {report.message}", err=True)
    raise typer.Exit(STATUS_EXIT_CODES[report.status])


@app.command()
def compare(
    spec_file: str = SPEC_ARGUMENT,
    step_scale: Optional[float] = STEP_SCALE_OPTION,
    tolerance: Optional[float] = TOLERANCE_OPTION,
    ball_check: Optional[BallCheckMode] = BALL_CHECK_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Compare the Karcher center with the closed-form centers (Euclidean, sphere, hyperboloid)."""
    logger = _setup(verbose)
    orchestrator = CenterOfMassOrchestrator()
    try:
        problem = orchestrator.load_problem(spec_file, _solver_overrides(step_scale, tolerance, ball_check))
        result = orchestrator.run_compare(problem)
    except CenterOfMassError as e:
        logger.error(f"compare failed: {e}")
        _fail(str(e))

    typer.echo(result.model_dump_json(indent=2))


@app.command()
def oracle(
    spec_file: str = SPEC_ARGUMENT,
    resolution: Optional[int] = typer.Option(None, "--resolution", "-n", help="Lattice points per axis (at least 16)"),
    step_scale: Optional[float] = STEP_SCALE_OPTION,
    tolerance: Optional[float] = TOLERANCE_OPTION,
    ball_check: Optional[BallCheckMode] = BALL_CHECK_OPTION,
    verbose: bool = VERBOSE_OPTION,
):
    """Locate the center by brute force on a tangent lattice and compare with the solver."""
    logger = _setup(verbose)
    orchestrator = CenterOfMassOrchestrator()
    try:
        problem = orchestrator.load_problem(
            spec_file,
            _solver_overrides(step_scale, tolerance, ball_check),
            {"resolution": resolution},
        )
        result = orchestrator.run_oracle(problem)
    except CenterOfMassError as e:
        logger.error(f"oracle failed: {e}")
        _fail(str(e))

    typer.echo(result.model_dump_json(indent=2))


if __name__ == "__main__":
    app()
