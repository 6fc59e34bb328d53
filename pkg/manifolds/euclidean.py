import math
from typing import List, Tuple

import numpy as np
from scipy.stats import ortho_group

from manifolds.base import MATRIX_TOLERANCE, Array, CurvatureData, Isometry, ModelSpace, PointCheck, SeedLike, as_generator
from manifolds.exceptions import InvalidIsometryError
from schemas.models import SpaceKind


def random_orthogonal(size: int, rng: np.random.Generator) -> Array:
    """Haar-distributed orthogonal matrix (ortho_group needs size >= 2)."""
    if size == 1:
        return np.array([[1.0 if rng.random() < 0.5 else -1.0]])
    return ortho_group.rvs(size, random_state=rng)


def orthogonality_residual(matrix: Array) -> float:
    return float(np.linalg.norm(matrix.T @ matrix - np.eye(matrix.shape[0])))


class EuclideanSpace(ModelSpace):
    """Flat space R^n with the standard inner product."""

    kind = SpaceKind.EUCLIDEAN

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        return (self.dim,)

    @property
    def curvature(self) -> CurvatureData:
        return CurvatureData(0.0, 0.0, math.inf)

    def origin(self) -> Array:
        return np.zeros(self.dim)

    def check_point(self, q: Array) -> PointCheck:
        if np.all(np.isfinite(q)):
            return PointCheck(True)
        return PointCheck(False, math.inf, "coordinates must be finite")

    def tangent_residual(self, x: Array, v: Array) -> float:
        return 0.0 if np.all(np.isfinite(v)) else math.inf

    def inner(self, x: Array, u: Array, v: Array) -> float:
        return float(u @ v)

    def project_tangent(self, x: Array, w: Array) -> Array:
        return np.array(w, dtype=np.float64)

    def tangent_basis(self, x: Array) -> List[Array]:
        return list(np.eye(self.dim))

    def exp(self, x: Array, v: Array) -> Array:
        return x + v

    def log(self, x: Array, p: Array) -> Array:
        return p - x

    def dist(self, x: Array, p: Array) -> float:
        return float(np.linalg.norm(p - x))

    def transport(self, x: Array, y: Array, v: Array) -> Array:
        return np.array(v, dtype=np.float64)

    def exp_batch(self, x: Array, vs: Array) -> Array:
        return x[None, :] + vs

    def dist_batch(self, xs: Array, p: Array) -> Array:
        return np.linalg.norm(xs - p[None, :], axis=1)

    def check_isometry(self, g: Isometry) -> None:
        if g.matrix.shape != (self.dim, self.dim):
            raise InvalidIsometryError(f"expected a {self.dim}x{self.dim} matrix, got shape {g.matrix.shape}")
        residual = orthogonality_residual(g.matrix)
        if residual > MATRIX_TOLERANCE:
            raise InvalidIsometryError(f"matrix is not orthogonal (residual {residual:.3e})")
        if g.translation is not None and g.translation.shape != (self.dim,):
            raise InvalidIsometryError(f"translation must have length {self.dim}")

    def apply_isometry(self, g: Isometry, q: Array) -> Array:
        self.check_isometry(g)
        moved = g.matrix @ q
        return moved if g.translation is None else moved + g.translation

    def push_tangent(self, g: Isometry, v: Array) -> Array:
        return g.matrix @ v

    def identity_isometry(self) -> Isometry:
        return Isometry(np.eye(self.dim), np.zeros(self.dim))

    def random_isometry(self, seed: SeedLike = None) -> Isometry:
        rng = as_generator(seed)
        matrix = random_orthogonal(self.dim, rng)
        return Isometry(matrix, rng.uniform(-2.0, 2.0, size=self.dim))
