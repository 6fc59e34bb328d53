"""Averaged-log vector field, Frechet function and covariant differential estimates."""
import math
from typing import Optional

import numpy as np

from config.logging import get_logger
from manifolds.base import Array, ModelSpace, PointCheck
from manifolds.exceptions import CutLocusError, StepTooLargeError
from manifolds.sample import WeightedSample

logger = get_logger(__name__)

# Largest finite difference step accepted by the differential estimators.
MAX_DIFFERENCE_STEP = 1e-3


def validate_point(space: ModelSpace, q: Array) -> PointCheck:
    """Check q against the point invariant of `space`, reporting the residual."""
    return space.check_point(np.asarray(q, dtype=np.float64))


def admissible_radius(space: ModelSpace, override: Optional[float] = None) -> float:
    return space.admissible_radius(override)


def mass_vector_field(space: ModelSpace, sample: WeightedSample, x: Array) -> Array:
    """V(x) = sum_i m_i log_x(p_i), summed in sample order."""
    total = np.zeros(space.ambient_shape)
    for i, (p, m) in enumerate(zip(sample.points, sample.masses)):
        try:
            total += m * space.log(x, p)
        except CutLocusError as exc:
            raise exc.with_index(i) from exc
    return total


def frechet_value(space: ModelSpace, sample: WeightedSample, x: Array) -> float:
    """f(x) = 0.5 * sum_i m_i d(x, p_i)^2."""
    return 0.5 * math.fsum(m * space.dist(x, p) ** 2 for p, m in zip(sample.points, sample.masses))


def max_point_distance(space: ModelSpace, sample: WeightedSample, x: Array) -> float:
    return max(space.dist(x, p) for p in sample.points)


def numerical_covariant_differential(space: ModelSpace, sample: WeightedSample, x: Array, h: float,
                                     radius_override: Optional[float] = None) -> Array:
    """Forward difference estimate of the covariant differential DV at x.

    Column j is (P V(exp_x(h e_j)) - V(x)) / h written in the tangent basis e
    at x, where P is parallel transport back to x.
    """
    if not 0.0 < h <= MAX_DIFFERENCE_STEP:
        raise StepTooLargeError(f"step {h!r} outside (0, {MAX_DIFFERENCE_STEP:g}]")
    slack = space.admissible_radius(radius_override) - max_point_distance(space, sample, x)
    if h >= slack:
        raise StepTooLargeError(f"step {h!r} exceeds the admissible ball slack {slack:.3e} at x")

    basis = space.tangent_basis(x)
    at_x = mass_vector_field(space, sample, x)
    estimate = np.empty((len(basis), len(basis)))
    for j, e in enumerate(basis):
        y = space.exp(x, h * e)
        moved = space.transport(y, x, mass_vector_field(space, sample, y))
        column = (moved - at_x) / h
        for i, b in enumerate(basis):
            estimate[i, j] = space.inner(x, b, column)
    logger.debug(f"covariant differential at h={h:g}: {estimate.tolist()}")
    return estimate


def richardson_covariant_differential(space: ModelSpace, sample: WeightedSample, x: Array, h: float,
                                      radius_override: Optional[float] = None) -> Array:
    """First order Richardson extrapolation 2 D(h/2) - D(h) of the forward difference estimate."""
    coarse = numerical_covariant_differential(space, sample, x, h, radius_override)
    fine = numerical_covariant_differential(space, sample, x, h / 2.0, radius_override)
    return 2.0 * fine - coarse
