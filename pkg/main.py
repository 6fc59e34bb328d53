from itertools import combinations
from typing import Any, Dict, Optional, Tuple

from config.logging import get_logger
from config.settings import get_settings
from manifolds.base import Array
from manifolds.exceptions import DegenerateMeanError, UnsupportedSpaceError
from manifolds.fields import frechet_value
from schemas.models import (
    CompareResult,
    ConvergenceReport,
    MeanResult,
    OracleRunResult,
    SpaceKind,
)
from services.center_solver import solve_center
from services.closed_form import (
    affine_center,
    cos_center_sphere,
    embed_project_center_hyperbolic,
    embed_project_center_sphere,
)
from services.problem_service import LoadedProblem, ProblemService
from services.verification import grid_oracle_center

COMPARABLE_SPACES = (SpaceKind.EUCLIDEAN, SpaceKind.SPHERE, SpaceKind.HYPERBOLOID)


class CenterOfMassOrchestrator:
    """
    Main orchestrator behind the command line: loads problems and runs the
    solver, the closed-form comparisons and the grid oracle.
    """

    def __init__(self):
        self.logger = get_logger(__name__)
        self.settings = get_settings()
        self.problem_service = ProblemService()

    def load_problem(self, spec_file: str, solver_overrides: Optional[Dict[str, Any]] = None,
                     oracle_overrides: Optional[Dict[str, Any]] = None) -> LoadedProblem:
        """
        Load a problem file and apply command line overrides.

        Args:
            spec_file: path of the JSON problem file
            solver_overrides: solver settings from the command line, None values are ignored
            oracle_overrides: oracle settings from the command line, None values are ignored

        Returns:
            LoadedProblem ready to run
        """
        spec = self.problem_service.load(spec_file)
        return self.problem_service.build(spec, solver_overrides, oracle_overrides)

    def run_mean(self, problem: LoadedProblem) -> Tuple[MeanResult, ConvergenceReport]:
        """Solve for the center of mass and summarize the run."""
        report = solve_center(problem.space, problem.sample, problem.config, problem.x0)
        self.logger.info(f"Center of mass: status {report.status.value}, {report.iterations} steps")
        result = MeanResult(
            center=report.center,
            status=report.status,
            iterations=report.iterations,
            gradient_norm=report.gradient_norm,
            frechet_value=report.frechet_value,
            ball=report.ball,
            message=report.message,
        )
        return result, report

    def run_compare(self, problem: LoadedProblem) -> CompareResult:
        """
        Compare the Karcher center with the closed-form centers defined on the space.

        Args:
            problem: loaded problem on a Euclidean, sphere or hyperboloid space

        Returns:
            CompareResult with every center, their pairwise distances and Frechet values

        Raises:
            UnsupportedSpaceError: on SO(n)
        """
        space = problem.space
        if space.kind not in COMPARABLE_SPACES:
            raise UnsupportedSpaceError(f"compare is defined for {', '.join(k.value for k in COMPARABLE_SPACES)}, not {space.kind.value}")

        report = solve_center(space, problem.sample, problem.config, problem.x0)
        centers: Dict[str, Optional[Array]] = {"karcher": space.as_point(report.center, validate=False)}
        errors: Dict[str, str] = {}
        if not report.converged:
            errors["karcher"] = report.message or report.status.value

        if space.kind == SpaceKind.EUCLIDEAN:
            centers["affine"] = affine_center(problem.sample)
        elif space.kind == SpaceKind.HYPERBOLOID:
            centers["embed_project"] = embed_project_center_hyperbolic(problem.sample)
        else:
            try:
                centers["embed_project"] = embed_project_center_sphere(problem.sample)
                cos_report = cos_center_sphere(problem.sample, problem.config)
                centers["cos_adapted"] = space.as_point(cos_report.center, validate=False)
                if not cos_report.converged:
                    errors["cos_adapted"] = cos_report.message or cos_report.status.value
            except DegenerateMeanError as exc:
                self.logger.warning(f"Closed-form centers undefined: {exc}")
                centers["embed_project"] = None
                centers["cos_adapted"] = None
                errors["embed_project"] = str(exc)
                errors["cos_adapted"] = str(exc)

        riemannian = space.riemannian()
        available = {name: c for name, c in centers.items() if c is not None}
        pairwise = {
            f"{a}:{b}": riemannian.dist(available[a], available[b])
            for a, b in combinations(available, 2)
        }
        values = {name: frechet_value(riemannian, problem.sample, c) for name, c in available.items()}
        return CompareResult(
            manifold=space.kind,
            karcher_status=report.status,
            centers={name: (space.flatten(c) if c is not None else None) for name, c in centers.items()},
            pairwise_distances=pairwise,
            frechet_values=values,
            errors=errors,
        )

    def run_oracle(self, problem: LoadedProblem) -> OracleRunResult:
        """Run the grid oracle and the solver on the same problem and report their distance."""
        oracle = grid_oracle_center(problem.space, problem.sample, problem.grid)
        report = solve_center(problem.space, problem.sample, problem.config, problem.x0)
        center = problem.space.as_point(report.center, validate=False)
        distance = problem.space.riemannian().dist(oracle.point, center)
        self.logger.info(f"Oracle and solver centers {distance:.3e} apart (bound {oracle.resolution_bound:.3e})")
        return OracleRunResult(
            oracle_point=problem.space.flatten(oracle.point),
            f_value=oracle.f_value,
            resolution=problem.grid.resolution,
            resolution_bound=oracle.resolution_bound,
            solver_center=report.center,
            solver_status=report.status,
            distance=distance,
        )
