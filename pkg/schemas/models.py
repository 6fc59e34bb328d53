from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# Largest matrix size supported for SO(n).
MAX_ROTATION_SIZE = 8


class SpaceKind(str, Enum):
    """Model spaces the library knows about."""
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    HYPERBOLOID = "hyperboloid"
    SPECIAL_ORTHOGONAL = "special_orthogonal"


class NormFlavor(str, Enum):
    """Tangent norm used on SO(n): Frobenius (Riemannian) or operator norm (Finsler)."""
    FROBENIUS = "frobenius"
    OPERATOR = "operator"


class BallCheckMode(str, Enum):
    ENFORCE = "enforce"
    WARN = "warn"
    SKIP = "skip"


class SolverStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS_REACHED = "max_iterations_reached"
    BALL_VIOLATION = "ball_violation"
    CUT_LOCUS = "cut_locus"


def rotation_size_from_dim(dim: int) -> Optional[int]:
    """Return n with n(n-1)/2 == dim, or None if dim is not such a number."""
    for n in range(2, MAX_ROTATION_SIZE + 1):
        if n * (n - 1) // 2 == dim:
            return n
    return None


class ManifoldSpec(BaseModel):
    """Manifold section of a problem file."""
    kind: SpaceKind = Field(description="Model space: euclidean, sphere, hyperboloid or special_orthogonal")
    dim: int = Field(ge=1, description="Intrinsic dimension. For special_orthogonal this is n(n-1)/2")
    norm_flavor: Optional[NormFlavor] = Field(default=None, description="SO(n) only: frobenius (default) or operator")

    @model_validator(mode="after")
    def _check_kind_specific(self) -> "ManifoldSpec":
        if self.kind == SpaceKind.SPECIAL_ORTHOGONAL:
            if rotation_size_from_dim(self.dim) is None:
                raise ValueError(
                    f"dim {self.dim} is not n(n-1)/2 for any supported matrix size 2 <= n <= {MAX_ROTATION_SIZE}"
                )
        elif self.norm_flavor is not None:
            raise ValueError("norm_flavor is only meaningful for special_orthogonal")
        return self


class SolverConfig(BaseModel):
    """Stopping rule and step control for the Euler iteration."""
    model_config = ConfigDict(extra="forbid")

    tolerance: float = Field(default=1e-10, gt=0, description="Stop once the vector field norm is at most this value")
    max_iterations: int = Field(default=1000, ge=0, description="Maximum number of Euler steps")
    step_scale: float = Field(default=1.0, gt=0, le=1, description="Fraction of the full Euler step; 1 is the plain step")
    ball_check: BallCheckMode = Field(default=BallCheckMode.ENFORCE, description="What to do when the points leave the admissible ball")
    admissible_radius: Optional[float] = Field(default=None, gt=0, description="Override for the admissible ball radius")
    record_iterates: bool = Field(default=False, description="Keep every iterate in the report")


class OracleGrid(BaseModel):
    """Lattice used by the brute force oracle."""
    model_config = ConfigDict(extra="forbid")

    resolution: int = Field(default=32, ge=16, description="Lattice points per tangent axis")
    search_radius: Optional[float] = Field(default=None, gt=0, description="Half width of the coarse lattice; defaults to the spread of the points around the hint")
    center_hint: Optional[List[float]] = Field(default=None, description="Flat ambient coordinates of the lattice center; defaults to the initial guess")


class ProblemSpec(BaseModel):
    """Problem file consumed by the command line."""
    model_config = ConfigDict(extra="forbid")

    manifold: ManifoldSpec = Field(description="Manifold the points live on")
    points: List[List[float]] = Field(min_length=1, description="Flat ambient coordinates of the mass points (row-major for SO(n))")
    masses: Optional[List[float]] = Field(default=None, description="Point masses; uniform if omitted")
    solver: SolverConfig = Field(default_factory=SolverConfig, description="Solver settings")
    x0: Optional[List[float]] = Field(default=None, description="Optional start point for the iteration")
    oracle: Optional[OracleGrid] = Field(default=None, description="Oracle lattice settings")

    @model_validator(mode="after")
    def _check_lengths(self) -> "ProblemSpec":
        lengths = {len(p) for p in self.points}
        if len(lengths) != 1:
            raise ValueError(f"points have inconsistent lengths {sorted(lengths)}")
        if self.masses is not None and len(self.masses) != len(self.points):
            raise ValueError(f"{len(self.masses)} masses given for {len(self.points)} points")
        return self


class TraceEntry(BaseModel):
    """State of the iteration at one iterate."""
    iteration: int = Field(description="Iterate index, 0 is the start point")
    gradient_norm: float = Field(description="Norm of the vector field at the iterate")
    frechet_value: float = Field(description="Value of the objective at the iterate")
    step_scale: Optional[float] = Field(default=None, description="Step scale used to leave this iterate, after any halving")


class BallCheckReport(BaseModel):
    radius_used: float = Field(description="Admissible ball radius")
    max_point_distance: float = Field(description="Largest distance from the ball center to a mass point")
    ok: bool = Field(description="Whether all points lie in the admissible ball")


class ConvergenceReport(BaseModel):
    """Outcome of an Euler iteration."""
    status: SolverStatus
    iterations: int = Field(description="Number of Euler steps taken")
    trace: List[TraceEntry] = Field(default_factory=list)
    center: List[float] = Field(description="Flat coordinates of the last iterate")
    ball: Optional[BallCheckReport] = None
    message: Optional[str] = None
    iterates: Optional[List[List[float]]] = Field(default=None, description="All iterates, when requested")

    @property
    def converged(self) -> bool:
        return self.status == SolverStatus.CONVERGED

    @property
    def gradient_norm(self) -> Optional[float]:
        return self.trace[-1].gradient_norm if self.trace else None

    @property
    def frechet_value(self) -> Optional[float]:
        return self.trace[-1].frechet_value if self.trace else None


class MeanResult(BaseModel):
    """JSON document printed by `mean`."""
    center: List[float]
    status: SolverStatus
    iterations: int
    gradient_norm: Optional[float]
    frechet_value: Optional[float]
    ball: Optional[BallCheckReport] = None
    message: Optional[str] = None


class CompareResult(BaseModel):
    """JSON document printed by `compare`."""
    manifold: SpaceKind
    karcher_status: SolverStatus
    centers: Dict[str, Optional[List[float]]]
    pairwise_distances: Dict[str, float]
    frechet_values: Dict[str, float]
    errors: Dict[str, str] = Field(default_factory=dict)


class OracleRunResult(BaseModel):
    """JSON document printed by `oracle`."""
    oracle_point: List[float]
    f_value: float
    resolution: int
    resolution_bound: float
    solver_center: List[float]
    solver_status: SolverStatus
    distance: float
