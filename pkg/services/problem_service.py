import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from config.logging import get_logger
from manifolds.base import Array, ModelSpace
from manifolds.exceptions import ProblemSpecError
from manifolds.factory import create_space
from manifolds.sample import WeightedSample
from schemas.models import OracleGrid, ProblemSpec, SolverConfig


@dataclass(eq=False)
class LoadedProblem:
    """A validated problem: the space, its sample and the effective settings."""
    spec: ProblemSpec
    space: ModelSpace
    sample: WeightedSample
    config: SolverConfig
    grid: OracleGrid
    x0: Optional[Array] = None


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        parts.append(f"{path}: {error['msg']}")
    return "; ".join(parts)


class ProblemService:
    """
    ProblemService - Loads problem files and turns them into validated inputs.

    Syntax errors are reported with line and column, schema errors with the
    path of the offending field. Point and mass validation happens when the
    problem is built against its model space.
    """

    def __init__(self):
        """Initialize the Problem Service."""
        self.logger = get_logger(__name__)

    def parse(self, text: str, source: str = "<problem>") -> ProblemSpec:
        """
        Parse and validate the JSON text of a problem file.

        Args:
            text: JSON document
            source: name used in error messages

        Returns:
            ProblemSpec: validated problem file

        Raises:
            ProblemSpecError: on malformed JSON or schema violations
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemSpecError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        try:
            return ProblemSpec.model_validate(data)
        except ValidationError as exc:
            raise ProblemSpecError(f"{source}: {_format_validation_error(exc)}") from exc

    def load(self, path: str) -> ProblemSpec:
        """Read and parse a UTF-8 problem file."""
        file_path = Path(path)
        try:
            text = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ProblemSpecError(f"cannot read problem file '{path}': {exc}") from exc
        self.logger.debug(f"Loaded problem file {file_path} ({len(text)} bytes)")
        return self.parse(text, source=str(file_path))

    def build(self, spec: ProblemSpec, solver_overrides: Optional[Dict[str, Any]] = None,
              oracle_overrides: Optional[Dict[str, Any]] = None) -> LoadedProblem:
        """
        Instantiate the space and the weighted sample of a problem.

        Args:
            spec: validated problem file
            solver_overrides: solver settings that replace the file values (command line flags)
            oracle_overrides: oracle settings that replace the file values

        Returns:
            LoadedProblem: ready-to-run problem

        Raises:
            ProblemSpecError: if an override is invalid
            InvalidPointError, MassNormalizationError: if the sample is invalid
        """
        space = create_space(spec.manifold)
        sample = WeightedSample.from_arrays(space, spec.points, spec.masses)
        config = self._merge(SolverConfig, spec.solver.model_dump(exclude_unset=True), solver_overrides, "solver")
        grid = self._merge(OracleGrid, (spec.oracle or OracleGrid()).model_dump(exclude_unset=True), oracle_overrides, "oracle")
        x0 = space.as_point(spec.x0) if spec.x0 is not None else None
        self.logger.info(f"Problem on {space!r} with {len(sample)} points")
        return LoadedProblem(spec=spec, space=space, sample=sample, config=config, grid=grid, x0=x0)

    @staticmethod
    def _merge(model, base: Dict[str, Any], overrides: Optional[Dict[str, Any]], section: str):
        values = dict(base)
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            return model.model_validate(values)
        except ValidationError as exc:
            raise ProblemSpecError(f"{section}: {_format_validation_error(exc)}") from exc
