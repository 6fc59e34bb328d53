"""Euler iteration x <- exp_x(s V(x)) for the Riemannian center of mass."""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from config.logging import get_logger
from manifolds.base import Array, ModelSpace
from manifolds.exceptions import CutLocusError
from manifolds.fields import frechet_value, mass_vector_field, max_point_distance
from manifolds.sample import WeightedSample
from schemas.models import (
    BallCheckMode,
    BallCheckReport,
    ConvergenceReport,
    SolverConfig,
    SolverStatus,
    TraceEntry,
)

logger = get_logger(__name__)

# Relative increase of the objective tolerated before the step is halved.
DESCENT_SLACK = 1e-14
MIN_STEP_SCALE = 2.0 ** -20


@dataclass(frozen=True)
class FieldObjective:
    """Vector field driving the iteration and the cost it is expected to decrease.

    The iteration stops once |field(x)| <= tolerance * gradient_scale.
    """
    field: Callable[[Array], Array]
    cost: Callable[[Array], float]
    gradient_scale: float = 1.0


@dataclass(frozen=True, eq=False)
class Containment:
    """Ball every iterate has to stay in."""
    anchor: Array
    radius: float
    mode: BallCheckMode


def initial_guess(space: ModelSpace, sample: WeightedSample) -> Array:
    """The mass point with the smallest Frechet value, lowest index on ties."""
    values = [frechet_value(space, sample, p) for p in sample.points]
    return sample.points[int(np.argmin(values))].copy()


def check_admissible_ball(space: ModelSpace, sample: WeightedSample, center_guess: Array,
                          radius_override: Optional[float] = None) -> BallCheckReport:
    radius = space.admissible_radius(radius_override)
    reach = max_point_distance(space, sample, center_guess)
    return BallCheckReport(radius_used=radius, max_point_distance=reach, ok=bool(reach <= radius))


def euler_step(space: ModelSpace, sample: WeightedSample, x: Array, step_scale: float = 1.0) -> Array:
    return space.exp(x, step_scale * mass_vector_field(space, sample, x))


def _guarded_step(space: ModelSpace, objective: FieldObjective, x: Array, v: Array, value: float,
                  step_scale: float) -> Tuple[Optional[Array], float]:
    """Take the step, halving the scale while the objective goes up."""
    threshold = value + DESCENT_SLACK * max(1.0, abs(value))
    scale = step_scale
    while True:
        candidate = space.exp(x, scale * v)
        if objective.cost(candidate) <= threshold:
            return candidate, scale
        logger.warning(f"Objective increased with step scale {scale:g}, halving the step")
        scale /= 2.0
        if scale < MIN_STEP_SCALE:
            return None, scale


def run_euler_iteration(space: ModelSpace, objective: FieldObjective, x0: Array, config: SolverConfig,
                        containment: Optional[Containment] = None) -> ConvergenceReport:
    """Iterate Euler steps along `objective.field` starting at x0."""
    x = np.array(x0, dtype=np.float64)
    trace = []
    iterates = [space.flatten(x)] if config.record_iterates else None
    steps = 0
    status = SolverStatus.MAX_ITERATIONS_REACHED
    message = None
    warned = False

    while True:
        try:
            v = objective.field(x)
        except CutLocusError as exc:
            status, message = SolverStatus.CUT_LOCUS, str(exc)
            break
        value = objective.cost(x)
        gradient_norm = space.norm(x, v)
        trace.append(TraceEntry(iteration=steps, gradient_norm=gradient_norm, frechet_value=value))
        logger.debug(f"iteration {steps}: |V| = {gradient_norm:.3e}, f = {value:.17g}")

        if gradient_norm <= config.tolerance * objective.gradient_scale:
            status = SolverStatus.CONVERGED
            break
        if steps >= config.max_iterations:
            message = f"no convergence after {steps} steps (|V| = {gradient_norm:.3e})"
            break

        try:
            x_next, scale = _guarded_step(space, objective, x, v, value, config.step_scale)
        except CutLocusError as exc:
            status, message = SolverStatus.CUT_LOCUS, str(exc)
            break
        if x_next is None:
            message = f"objective increased at every step scale down to {MIN_STEP_SCALE:g} at iteration {steps}"
            break
        trace[-1] = trace[-1].model_copy(update={"step_scale": scale})
        x = x_next
        steps += 1
        if iterates is not None:
            iterates.append(space.flatten(x))

        if containment is not None and containment.mode != BallCheckMode.SKIP:
            reach = space.dist(containment.anchor, x)
            if reach > containment.radius:
                text = f"iterate {steps} left the admissible ball (distance {reach:.6g} > {containment.radius:.6g})"
                if containment.mode == BallCheckMode.ENFORCE:
                    status, message = SolverStatus.BALL_VIOLATION, text
                    break
                if not warned:
                    logger.warning(text)
                    warned = True

    if message and status != SolverStatus.CONVERGED:
        logger.warning(f"Euler iteration stopped: {message}")
    logger.info(f"Euler iteration finished with status {status.value} after {steps} steps")
    return ConvergenceReport(
        status=status,
        iterations=steps,
        trace=trace,
        center=space.flatten(x),
        message=message,
        iterates=iterates,
    )


def solve_center(space: ModelSpace, sample: WeightedSample, config: Optional[SolverConfig] = None,
                 x0: Optional[Array] = None) -> ConvergenceReport:
    """Riemannian center of mass: the zero of V in the admissible ball around the initial guess.

    The sample is put in canonical order first so the result does not depend
    on how the mass points are listed.
    """
    config = config or SolverConfig()
    sample = sample.canonical()
    anchor = initial_guess(space, sample)
    start = anchor if x0 is None else space.as_point(x0)

    ball = None
    containment = None
    if config.ball_check != BallCheckMode.SKIP:
        ball = check_admissible_ball(space, sample, anchor, config.admissible_radius)
        violation = None
        if not ball.ok:
            violation = (
                f"mass points reach distance {ball.max_point_distance:.6g} from the initial guess, "
                f"beyond the admissible radius {ball.radius_used:.6g}"
            )
        elif space.dist(anchor, start) > ball.radius_used:
            violation = f"start point lies outside the admissible ball of radius {ball.radius_used:.6g}"
        if violation is not None:
            logger.warning(violation)
            if config.ball_check == BallCheckMode.ENFORCE:
                return ConvergenceReport(
                    status=SolverStatus.BALL_VIOLATION,
                    iterations=0,
                    trace=[],
                    center=space.flatten(start),
                    ball=ball,
                    message=violation,
                )
        containment = Containment(anchor, ball.radius_used, config.ball_check)

    # descent is monitored on the Riemannian Frechet function for every norm flavor
    riemannian = space.riemannian()
    objective = FieldObjective(
        field=lambda x: mass_vector_field(space, sample, x),
        cost=lambda x: frechet_value(riemannian, sample, x),
    )
    report = run_euler_iteration(space, objective, start, config, containment)
    return report.model_copy(update={"ball": ball})
