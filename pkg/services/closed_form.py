"""Embed-and-project centers and the cos-adapted sphere cost."""
import math
from typing import Optional

import numpy as np

from config.logging import get_logger
from manifolds.base import Array
from manifolds.exceptions import DegenerateMeanError
from manifolds.hyperboloid import minkowski_inner
from manifolds.sample import WeightedSample
from manifolds.sphere import Sphere
from schemas.models import ConvergenceReport, SolverConfig
from services.center_solver import FieldObjective, run_euler_iteration

logger = get_logger(__name__)

# Below this ambient mean norm the projection direction is meaningless.
DEGENERATE_MEAN_NORM = 1e-12


def affine_center(sample: WeightedSample) -> Array:
    """sum_i m_i p_i in ambient coordinates."""
    return np.tensordot(sample.masses, sample.points, axes=1)


def _sphere_mean(sample: WeightedSample) -> Array:
    mu = affine_center(sample)
    length = float(np.linalg.norm(mu))
    if length <= DEGENERATE_MEAN_NORM:
        raise DegenerateMeanError(f"ambient mean has norm {length:.3e}; the sample is balanced around the origin")
    return mu


def embed_project_center_sphere(sample: WeightedSample) -> Array:
    mu = _sphere_mean(sample)
    return mu / np.linalg.norm(mu)


def embed_project_center_hyperbolic(sample: WeightedSample) -> Array:
    """Minkowski mean of hyperboloid points pushed back onto the upper sheet."""
    mu = affine_center(sample)
    square = minkowski_inner(mu, mu)
    # a convex combination of upper-sheet points is always timelike
    if square >= 0.0:
        raise AssertionError(f"Minkowski mean is not timelike (<mu,mu>_M = {square!r})")
    return mu / math.sqrt(-square)


def cos_adapted_field_sphere(sample: WeightedSample, x: Array) -> Array:
    """Negative gradient of sum_i m_i (1 - cos d(x, p_i)), i.e. mu - <x,mu> x."""
    mu = affine_center(sample)
    return mu - float(x @ mu) * x


def cos_adapted_cost_sphere(sample: WeightedSample, x: Array) -> float:
    return math.fsum(m * (1.0 - float(np.clip(x @ p, -1.0, 1.0))) for p, m in zip(sample.points, sample.masses))


def cos_iteration_budget(mean_norm: float, tolerance: float) -> int:
    """Iterations the cos-adapted step needs to shrink the angle to mu below tolerance.

    Each step contracts the angle by about 1 - |mu|; twice the linear estimate
    covers the nonlinear start.
    """
    if mean_norm >= 1.0:
        return 1
    return 2 * math.ceil(math.log(tolerance) / math.log1p(-mean_norm)) + 1


def cos_center_sphere(sample: WeightedSample, config: Optional[SolverConfig] = None,
                      x0: Optional[Array] = None) -> ConvergenceReport:
    """Euler iteration on the cos-adapted field.

    Starts from the sample point of least cos-adapted cost and stops once
    |W(x)| <= tolerance * |mu|, that is once the sine of the angle between x
    and mu drops below the tolerance.

    Raises:
        DegenerateMeanError: if |mu| <= 1e-12
    """
    config = config or SolverConfig()
    sample = sample.canonical()
    mu = _sphere_mean(sample)
    space = Sphere(sample.points.shape[1] - 1)

    if x0 is None:
        costs = [cos_adapted_cost_sphere(sample, p) for p in sample.points]
        start = sample.points[int(np.argmin(costs))].copy()
    else:
        start = space.as_point(x0)

    mean_norm = float(np.linalg.norm(mu))
    budget = cos_iteration_budget(mean_norm, config.tolerance)
    if "max_iterations" not in config.model_fields_set and budget > config.max_iterations:
        logger.info(f"Raising the iteration limit to {budget} for |mu| = {mean_norm:.3e}")
        config = config.model_copy(update={"max_iterations": budget})

    objective = FieldObjective(
        field=lambda x: cos_adapted_field_sphere(sample, x),
        cost=lambda x: cos_adapted_cost_sphere(sample, x),
        gradient_scale=mean_norm,
    )
    logger.debug(f"cos-adapted iteration with |mu| = {objective.gradient_scale:.6g}")
    return run_euler_iteration(space, objective, start, config)
