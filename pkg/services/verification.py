"""Brute force oracle and finite difference checks for the center solver."""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config.logging import get_logger
from manifolds.base import Array, ModelSpace
from manifolds.exceptions import StepTooLargeError, UnsupportedSpaceError
from manifolds.fields import frechet_value, mass_vector_field, max_point_distance
from manifolds.sample import WeightedSample
from schemas.models import OracleGrid
from services.center_solver import initial_guess

logger = get_logger(__name__)

MAX_ORACLE_DIM = 3
MIN_SEARCH_RADIUS = 1e-6
MIN_GRADIENT_STEP = 1e-6
MAX_GRADIENT_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Best lattice point, its Frechet value and the fine lattice spacing."""
    point: Array
    f_value: float
    resolution_bound: float


def _lattice(dim: int, resolution: int, half_width: float) -> Tuple[Array, float]:
    """Tangent coordinates of a cubic lattice over [-R, R]^dim in C order."""
    axis = np.linspace(-half_width, half_width, resolution)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, dim), 2.0 * half_width / (resolution - 1)


def _lattice_values(space: ModelSpace, sample: WeightedSample, base: Array, coords: Array) -> Tuple[Array, Array]:
    basis = np.stack(space.tangent_basis(base))
    candidates = space.exp_batch(base, np.tensordot(coords, basis, axes=1))
    riemannian = space.riemannian()
    values = np.zeros(len(candidates))
    for p, m in zip(sample.points, sample.masses):
        values += m * riemannian.dist_batch(candidates, p) ** 2
    return candidates, 0.5 * values


def grid_oracle_center(space: ModelSpace, sample: WeightedSample, grid: Optional[OracleGrid] = None) -> OracleResult:
    """Minimize the Frechet function over a normal coordinate lattice, then once more around the best cell.

    Args:
        space: model space of intrinsic dimension at most 3
        sample: weighted sample
        grid: lattice settings; the hint defaults to the initial guess

    Returns:
        OracleResult with the best fine lattice point

    Raises:
        UnsupportedSpaceError: for intrinsic dimension above 3
    """
    grid = grid or OracleGrid()
    if space.dim > MAX_ORACLE_DIM:
        raise UnsupportedSpaceError(f"the grid oracle supports intrinsic dimension <= {MAX_ORACLE_DIM}, got {space.dim}")

    hint = space.as_point(grid.center_hint) if grid.center_hint is not None else initial_guess(space, sample.canonical())
    radius = grid.search_radius
    if radius is None:
        radius = max(max_point_distance(space.riemannian(), sample, hint), MIN_SEARCH_RADIUS)
    limit = space.riemannian().admissible_radius()
    if radius > limit:
        logger.warning(f"search radius {radius:.6g} exceeds the admissible radius, using {limit:.6g}")
        radius = limit

    coords, coarse_spacing = _lattice(space.dim, grid.resolution, radius)
    candidates, values = _lattice_values(space, sample, hint, coords)
    best = candidates[int(np.argmin(values))]
    logger.debug(f"coarse lattice: spacing {coarse_spacing:.3e}, best f = {values.min():.17g}")

    coords, fine_spacing = _lattice(space.dim, grid.resolution, coarse_spacing)
    candidates, values = _lattice_values(space, sample, best, coords)
    index = int(np.argmin(values))
    logger.info(f"grid oracle finished: f = {values[index]:.17g}, spacing {fine_spacing:.3e}")
    return OracleResult(point=candidates[index], f_value=float(values[index]), resolution_bound=fine_spacing)


def gradient_check(space: ModelSpace, sample: WeightedSample, x: Array, h: float) -> float:
    """Largest gap between central differences of f along basis geodesics and -<V(x), u>."""
    if not MIN_GRADIENT_STEP <= h <= MAX_GRADIENT_STEP:
        raise StepTooLargeError(f"step {h!r} outside [{MIN_GRADIENT_STEP:g}, {MAX_GRADIENT_STEP:g}]")
    riemannian = space.riemannian()
    v = mass_vector_field(space, sample, x)
    worst = 0.0
    for u in space.tangent_basis(x):
        forward = frechet_value(riemannian, sample, space.exp(x, h * u))
        backward = frechet_value(riemannian, sample, space.exp(x, -h * u))
        error = abs((forward - backward) / (2.0 * h) + space.inner(x, v, u))
        worst = max(worst, error)
    return worst
