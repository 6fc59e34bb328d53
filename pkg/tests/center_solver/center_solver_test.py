import logging

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from manifolds import EuclideanSpace, Hyperboloid, SpecialOrthogonal, Sphere, WeightedSample
from manifolds.fields import frechet_value, mass_vector_field
from schemas.models import BallCheckMode, NormFlavor, SolverConfig, SolverStatus
from services.center_solver import (
    FieldObjective,
    check_admissible_ball,
    euler_step,
    initial_guess,
    run_euler_iteration,
    solve_center,
)

# Sample radius per space, small enough for every point to sit in the admissible ball of every other.
SAMPLE_RADII = {
    "euclidean_2": (lambda: EuclideanSpace(2), 2.0),
    "euclidean_3": (lambda: EuclideanSpace(3), 2.0),
    "sphere_2": (lambda: Sphere(2), 0.3),
    "hyperboloid_2": (lambda: Hyperboloid(2), 0.7),
    "so_3": (lambda: SpecialOrthogonal(3), 0.8),
}


def random_base_point(space, rng):
    origin = space.origin()
    return space.exp(origin, rng.uniform(0.0, 1.0) * space.random_tangent(origin, rng))


def seeded_sample(space, radius, rng, count=5):
    center = random_base_point(space, rng)
    points = np.stack([space.random_point_in_ball(center, radius, rng) for _ in range(count)])
    return WeightedSample.from_arrays(space, points, rng.dirichlet(np.ones(count)))


def as_point(space, report):
    return space.as_point(report.center, validate=False)


class TestCenterSolver:
    """Euler iteration for the Riemannian center of mass"""

    @pytest.fixture(params=sorted(SAMPLE_RADII))
    def space_and_radius(self, request):
        factory, radius = SAMPLE_RADII[request.param]
        return factory(), radius

    def test_converges_to_a_zero_of_the_field(self, space_and_radius):
        space, radius = space_and_radius
        rng = np.random.default_rng(1)
        for _ in range(10):
            sample = seeded_sample(space, radius, rng)
            report = solve_center(space, sample)
            assert report.status == SolverStatus.CONVERGED
            assert report.ball.ok
            center = as_point(space, report)
            assert space.check_point(center).ok
            assert space.norm(center, mass_vector_field(space, sample, center)) <= 1e-10

    def test_monotone_descent_and_contraction(self, space_and_radius):
        space, radius = space_and_radius
        rng = np.random.default_rng(2)
        config = SolverConfig(record_iterates=True)
        for _ in range(25):
            sample = seeded_sample(space, radius, rng)
            report = solve_center(space, sample, config)
            assert report.converged
            assert len(report.iterates) == report.iterations + 1
            assert len(report.trace) == report.iterations + 1

            values = [entry.frechet_value for entry in report.trace]
            for k in range(len(values) - 1):
                assert values[k + 1] <= values[k] + 1e-14 * max(1.0, abs(values[k]))
                if report.trace[k].gradient_norm > 1e-6:
                    assert values[k + 1] < values[k]

            center = as_point(space, report)
            distances = [space.dist(space.as_point(q, validate=False), center) for q in report.iterates]
            for k in range(len(distances) - 1):
                assert distances[k + 1] <= distances[k] + 1e-12

    def test_restarts_reach_the_same_center(self, space_and_radius):
        space, radius = space_and_radius
        rng = np.random.default_rng(3)
        for _ in range(5):
            sample = seeded_sample(space, radius, rng)
            anchor = initial_guess(space, sample.canonical())
            centers = []
            for _ in range(10):
                x0 = space.random_point_in_ball(anchor, min(0.15, radius), rng)
                report = solve_center(space, sample, x0=x0)
                assert report.converged
                centers.append(as_point(space, report))
            for a in centers:
                for b in centers:
                    assert space.dist(a, b) <= 1e-8

    def test_isometry_equivariance(self, space_and_radius):
        space, radius = space_and_radius
        rng = np.random.default_rng(4)
        for _ in range(100):
            sample = seeded_sample(space, radius, rng, count=4)
            g = space.random_isometry(rng)
            moved = sample.map_points(lambda p: space.apply_isometry(g, p))
            center = as_point(space, solve_center(space, sample))
            moved_center = as_point(space, solve_center(space, moved))
            np.testing.assert_allclose(moved_center, space.apply_isometry(g, center), atol=1e-8)

    def test_permutation_invariance(self, space_and_radius):
        space, radius = space_and_radius
        rng = np.random.default_rng(5)
        for _ in range(10):
            sample = seeded_sample(space, radius, rng, count=6)
            order = rng.permutation(6)
            shuffled = WeightedSample(sample.points[order], sample.masses[order])
            a = np.array(solve_center(space, sample).center)
            b = np.array(solve_center(space, shuffled).center)
            assert np.max(np.abs(a - b)) <= 1e-14

    def test_fixed_point(self, space_and_radius):
        """A converged center is left in place by a further solve started there."""
        space, radius = space_and_radius
        rng = np.random.default_rng(6)
        sample = seeded_sample(space, radius, rng)
        center = as_point(space, solve_center(space, sample))
        again = solve_center(space, sample, x0=center)
        assert again.iterations <= 1
        assert space.dist(as_point(space, again), center) <= 1e-10


class TestEuclideanExactness:
    """On flat space one Euler step lands on the affine centroid"""

    def test_one_step_reaches_the_centroid(self):
        space = EuclideanSpace(3)
        rng = np.random.default_rng(10)
        sample = WeightedSample.from_arrays(space, rng.uniform(-3.0, 3.0, (6, 3)), rng.dirichlet(np.ones(6)))
        centroid = np.tensordot(sample.masses, sample.points, axes=1)
        for _ in range(100):
            x0 = rng.uniform(-5.0, 5.0, 3)
            np.testing.assert_allclose(euler_step(space, sample, x0), centroid, atol=1e-12)
            report = solve_center(space, sample, x0=x0)
            assert report.converged
            assert report.iterations == 1

    def test_three_point_centroid(self):
        space = EuclideanSpace(2)
        sample = WeightedSample.from_arrays(space, [[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]])
        report = solve_center(space, sample)
        assert report.status == SolverStatus.CONVERGED
        assert report.iterations == 1
        assert report.center == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_initial_guess_breaks_ties_by_lowest_index(self):
        space = EuclideanSpace(2)
        sample = WeightedSample.from_arrays(space, [[2.0, 0.0], [1.0, 3.0], [0.0, 0.0]]).canonical()
        np.testing.assert_array_equal(initial_guess(space, sample), [0.0, 0.0])

    def test_single_point(self):
        space = Sphere(2)
        p = np.array([0.0, 0.6, 0.8])
        report = solve_center(space, WeightedSample.from_arrays(space, [p]))
        assert report.converged
        assert report.iterations == 0
        assert report.center == pytest.approx(p.tolist(), abs=0.0)


class TestMetricIndependence:
    """The Frobenius and operator norm flavors of SO(3) find the same center"""

    def test_flavors_agree(self):
        frobenius = SpecialOrthogonal(3, NormFlavor.FROBENIUS)
        operator = SpecialOrthogonal(3, NormFlavor.OPERATOR)
        rng = np.random.default_rng(11)
        for _ in range(25):
            sample = seeded_sample(frobenius, 0.8, rng)
            a = solve_center(frobenius, sample)
            b = solve_center(operator, sample)
            assert a.converged and b.converged
            assert frobenius.dist(as_point(frobenius, a), as_point(frobenius, b)) <= 1e-9

    def test_operator_radius_stays_below_the_cut_locus(self):
        frobenius = SpecialOrthogonal(3)
        operator = SpecialOrthogonal(3, NormFlavor.OPERATOR)
        sample = seeded_sample(frobenius, 0.8, np.random.default_rng(12))
        guess = initial_guess(frobenius, sample)
        a = check_admissible_ball(frobenius, sample, guess)
        b = check_admissible_ball(operator, sample, guess)
        assert a.radius_used == pytest.approx(np.pi / np.sqrt(2.0))
        assert b.radius_used == pytest.approx(np.pi / 2.0)
        assert b.radius_used < np.pi

    def test_operator_check_rejects_half_turns(self):
        space = SpecialOrthogonal(3, NormFlavor.OPERATOR)
        half_turn = np.diag([-1.0, -1.0, 1.0])
        sample = WeightedSample.from_arrays(space, [np.eye(3), half_turn])
        report = solve_center(space, sample)
        assert report.status == SolverStatus.BALL_VIOLATION
        assert report.ball.max_point_distance == pytest.approx(np.pi)
        assert not report.ball.ok

    def test_operator_run_accepts_a_wider_two_plane_sample(self):
        """Equal angles in two planes: outside the Frobenius ball, inside the operator ball."""
        frobenius = SpecialOrthogonal(4, NormFlavor.FROBENIUS)
        operator = SpecialOrthogonal(4, NormFlavor.OPERATOR)
        q = special_ortho_group.rvs(4, random_state=np.random.default_rng(13))

        def two_plane(angle):
            c, s = np.cos(angle), np.sin(angle)
            block = np.array([[c, -s], [s, c]])
            r = np.zeros((4, 4))
            r[:2, :2] = block
            r[2:, 2:] = block
            return q @ r @ q.T

        sample = WeightedSample.from_arrays(frobenius, [two_plane(0.0), two_plane(1.3)], [0.3, 0.7])

        rejected = solve_center(frobenius, sample)
        assert rejected.status == SolverStatus.BALL_VIOLATION
        assert rejected.ball.max_point_distance == pytest.approx(2.0 * 1.3)

        accepted = solve_center(operator, sample)
        assert accepted.converged
        assert accepted.ball.ok
        assert accepted.ball.max_point_distance == pytest.approx(1.3)

        unchecked = solve_center(frobenius, sample, SolverConfig(ball_check=BallCheckMode.WARN))
        assert unchecked.converged
        center = as_point(frobenius, accepted)
        assert frobenius.dist(center, as_point(frobenius, unchecked)) <= 1e-9
        assert frobenius.dist(center, two_plane(0.7 * 1.3)) <= 1e-9


class TestBallAndFailureModes:
    """Admissible ball enforcement and solver statuses"""

    @pytest.fixture
    def antipodal_sample(self):
        return WeightedSample.from_arrays(Sphere(2), [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])

    @pytest.fixture
    def wide_sample(self):
        space = Sphere(2)
        points = [space.exp(space.origin(), np.array([0.0, s, 0.0])) for s in (-0.6, 0.6)]
        return WeightedSample.from_arrays(space, points)

    def test_enforce_rejects_antipodal_points(self, antipodal_sample):
        report = solve_center(Sphere(2), antipodal_sample)
        assert report.status == SolverStatus.BALL_VIOLATION
        assert report.iterations == 0
        assert not report.ball.ok
        assert report.ball.max_point_distance == pytest.approx(np.pi)

    @pytest.mark.parametrize("mode", [BallCheckMode.WARN, BallCheckMode.SKIP])
    def test_antipodal_points_hit_the_cut_locus(self, antipodal_sample, mode):
        report = solve_center(Sphere(2), antipodal_sample, SolverConfig(ball_check=mode))
        assert report.status == SolverStatus.CUT_LOCUS
        assert "cut locus" in report.message

    def test_warn_mode_logs_and_continues(self, wide_sample, caplog):
        caplog.set_level(logging.WARNING)
        report = solve_center(Sphere(2), wide_sample, SolverConfig(ball_check=BallCheckMode.WARN))
        assert report.converged
        assert "admissible radius" in caplog.text
        assert report.center == pytest.approx([1.0, 0.0, 0.0], abs=1e-10)

    def test_enforce_mode_stops_on_wide_sample(self, wide_sample):
        report = solve_center(Sphere(2), wide_sample)
        assert report.status == SolverStatus.BALL_VIOLATION

    def test_skip_mode_has_no_ball_report(self, wide_sample):
        report = solve_center(Sphere(2), wide_sample, SolverConfig(ball_check=BallCheckMode.SKIP))
        assert report.ball is None
        assert report.converged

    def test_radius_override(self, wide_sample):
        report = solve_center(Sphere(2), wide_sample, SolverConfig(admissible_radius=1.3))
        assert report.converged
        assert report.ball.radius_used == 1.3

    def test_start_point_outside_the_ball(self):
        space = Sphere(2)
        sample = WeightedSample.from_arrays(space, [[1.0, 0.0, 0.0]])
        report = solve_center(space, sample, x0=np.array([0.0, 1.0, 0.0]))
        assert report.status == SolverStatus.BALL_VIOLATION
        assert "start point" in report.message

    def test_max_iterations(self):
        space = Sphere(2)
        sample = WeightedSample.from_arrays(space, [[1.0, 0.0, 0.0], [0.8, 0.6, 0.0]])
        report = solve_center(space, sample, SolverConfig(max_iterations=0))
        assert report.status == SolverStatus.MAX_ITERATIONS_REACHED
        assert report.iterations == 0
        assert len(report.trace) == 1

        report = solve_center(space, sample, SolverConfig(max_iterations=2, step_scale=0.01))
        assert report.status == SolverStatus.MAX_ITERATIONS_REACHED
        assert report.iterations == 2
        assert [entry.step_scale for entry in report.trace] == [0.01, 0.01, None]

    def test_step_scale_slows_convergence(self):
        space = Hyperboloid(2)
        sample = seeded_sample(space, 0.7, np.random.default_rng(13))
        full = solve_center(space, sample)
        damped = solve_center(space, sample, SolverConfig(step_scale=0.5))
        assert damped.converged
        assert damped.iterations > full.iterations
        assert space.dist(as_point(space, full), as_point(space, damped)) <= 1e-9


class TestEulerIteration:
    """The shared iteration loop with a pluggable objective"""

    def test_overshooting_field_is_halved(self):
        space = EuclideanSpace(1)
        objective = FieldObjective(field=lambda x: -3.0 * x, cost=lambda x: 0.5 * float(x @ x))
        report = run_euler_iteration(space, objective, np.array([1.0]), SolverConfig())
        assert report.converged
        assert report.trace[0].step_scale == 0.5
        assert abs(report.center[0]) <= 1e-10

    def test_ascent_field_gives_up(self, caplog):
        caplog.set_level(logging.WARNING)
        space = EuclideanSpace(1)
        objective = FieldObjective(field=lambda x: x, cost=lambda x: 0.5 * float(x @ x))
        report = run_euler_iteration(space, objective, np.array([1.0]), SolverConfig())
        assert report.status == SolverStatus.MAX_ITERATIONS_REACHED
        assert report.iterations == 0
        assert "halving" in caplog.text

    def test_trace_values_use_the_objective(self):
        space = Sphere(2)
        sample = WeightedSample.from_arrays(space, [[1.0, 0.0, 0.0], [0.8, 0.6, 0.0]])
        objective = FieldObjective(
            field=lambda x: mass_vector_field(space, sample, x),
            cost=lambda x: frechet_value(space, sample, x),
        )
        start = np.array([1.0, 0.0, 0.0])
        report = run_euler_iteration(space, objective, start, SolverConfig())
        assert report.trace[0].frechet_value == frechet_value(space, sample, start)
        assert report.trace[0].iteration == 0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
