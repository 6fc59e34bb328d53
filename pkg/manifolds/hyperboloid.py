import math
from typing import Tuple

import numpy as np

from manifolds.base import (
    MATRIX_TOLERANCE,
    POINT_TOLERANCE,
    Array,
    CurvatureData,
    Isometry,
    ModelSpace,
    PointCheck,
    SeedLike,
    as_generator,
)
from manifolds.euclidean import random_orthogonal
from manifolds.exceptions import InvalidIsometryError
from schemas.models import SpaceKind


def minkowski_inner(u: Array, v: Array) -> float:
    """<u, v>_M = -u0 v0 + sum_i ui vi."""
    return float(u[1:] @ v[1:] - u[0] * v[0])


def arccosh1p(t: float) -> float:
    """arccosh(1 + t) for t >= 0, accurate for small t."""
    t = max(t, 0.0)
    return math.log1p(t + math.sqrt(t * (t + 2.0)))


def lorentz_boost(direction: Array, rapidity: float) -> Array:
    """Boost of the given rapidity along a spatial unit direction."""
    n = np.asarray(direction, dtype=np.float64)
    n = n / np.linalg.norm(n)
    size = n.size + 1
    boost = np.eye(size)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    boost[0, 0] = ch
    boost[0, 1:] = sh * n
    boost[1:, 0] = sh * n
    boost[1:, 1:] += (ch - 1.0) * np.outer(n, n)
    return boost


class Hyperboloid(ModelSpace):
    """Hyperbolic space H^n as the upper sheet {<x,x>_M = -1, x0 > 0} in Minkowski space."""

    kind = SpaceKind.HYPERBOLOID

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        return (self.dim + 1,)

    @property
    def curvature(self) -> CurvatureData:
        return CurvatureData(-1.0, -1.0, math.inf)

    @property
    def _form(self) -> Array:
        j = np.eye(self.dim + 1)
        j[0, 0] = -1.0
        return j

    def origin(self) -> Array:
        e0 = np.zeros(self.dim + 1)
        e0[0] = 1.0
        return e0

    def check_point(self, q: Array) -> PointCheck:
        if not np.all(np.isfinite(q)):
            return PointCheck(False, math.inf, "coordinates must be finite")
        residual = abs(minkowski_inner(q, q) + 1.0)
        # rounding in <x,x>_M grows with |x|^2
        scale = max(1.0, float(q @ q))
        if residual > POINT_TOLERANCE * scale:
            return PointCheck(False, residual, f"point is off the hyperboloid: |<x,x>_M + 1| = {residual:.3e}")
        if q[0] <= 0.0:
            return PointCheck(False, residual, "point lies on the lower sheet (x0 <= 0)")
        return PointCheck(True, residual)

    def tangent_residual(self, x: Array, v: Array) -> float:
        scale = max(1.0, float(np.linalg.norm(x) * np.linalg.norm(v)))
        return abs(minkowski_inner(x, v)) / scale

    def inner(self, x: Array, u: Array, v: Array) -> float:
        return minkowski_inner(u, v)

    def project_tangent(self, x: Array, w: Array) -> Array:
        return w + minkowski_inner(x, w) * x

    def _renormalize(self, y: Array) -> Array:
        return y / math.sqrt(-minkowski_inner(y, y))

    @staticmethod
    def _excess(x: Array, p: Array) -> float:
        """-<x,p>_M - 1, evaluated from the difference to avoid cancellation."""
        d = p - x
        return max(minkowski_inner(d, d), 0.0) / 2.0

    def exp(self, x: Array, v: Array) -> Array:
        t = math.sqrt(max(minkowski_inner(v, v), 0.0))
        if t == 0.0:
            return np.array(x, dtype=np.float64)
        y = math.cosh(t) * x + (math.sinh(t) / t) * v
        return self._renormalize(y)

    def log(self, x: Array, p: Array) -> Array:
        t = self._excess(x, p)
        # p + <x,p>_M x, rewritten around the difference p - x
        u = (p - x) - t * x
        u = self.project_tangent(x, u)
        length = math.sqrt(max(minkowski_inner(u, u), 0.0))
        if length == 0.0:
            return np.zeros_like(x, dtype=np.float64)
        return (arccosh1p(t) / length) * u

    def dist(self, x: Array, p: Array) -> float:
        return arccosh1p(self._excess(x, p))

    def transport(self, x: Array, y: Array, v: Array) -> Array:
        return v + (minkowski_inner(y, v) / (1.0 - minkowski_inner(x, y))) * (x + y)

    def exp_batch(self, x: Array, vs: Array) -> Array:
        sq = np.einsum("ij,ij->i", vs @ self._form, vs)
        t = np.sqrt(np.maximum(sq, 0.0))
        safe = np.where(t > 0.0, t, 1.0)
        coef = np.where(t > 0.0, np.sinh(t) / safe, 1.0)
        ys = np.cosh(t)[:, None] * x[None, :] + coef[:, None] * vs
        norms = np.sqrt(-np.einsum("ij,ij->i", ys @ self._form, ys))
        return ys / norms[:, None]

    def dist_batch(self, xs: Array, p: Array) -> Array:
        d = p[None, :] - xs
        t = np.maximum(np.einsum("ij,ij->i", d @ self._form, d), 0.0) / 2.0
        return np.log1p(t + np.sqrt(t * (t + 2.0)))

    def check_isometry(self, g: Isometry) -> None:
        size = self.dim + 1
        if g.matrix.shape != (size, size):
            raise InvalidIsometryError(f"expected a {size}x{size} matrix, got shape {g.matrix.shape}")
        form = self._form
        scale = max(1.0, float(np.linalg.norm(g.matrix)) ** 2)
        residual = float(np.linalg.norm(g.matrix.T @ form @ g.matrix - form))
        if residual > MATRIX_TOLERANCE * scale:
            raise InvalidIsometryError(f"matrix does not preserve the Minkowski form (residual {residual:.3e})")
        if g.matrix[0, 0] < 1.0 - MATRIX_TOLERANCE:
            raise InvalidIsometryError("matrix reverses time orientation")

    def apply_isometry(self, g: Isometry, q: Array) -> Array:
        self.check_isometry(g)
        return g.matrix @ q

    def push_tangent(self, g: Isometry, v: Array) -> Array:
        return g.matrix @ v

    def identity_isometry(self) -> Isometry:
        return Isometry(np.eye(self.dim + 1))

    def random_isometry(self, seed: SeedLike = None) -> Isometry:
        rng = as_generator(seed)
        rotation = np.eye(self.dim + 1)
        rotation[1:, 1:] = random_orthogonal(self.dim, rng)
        direction = rng.standard_normal(self.dim)
        boost = lorentz_boost(direction, rng.uniform(-1.0, 1.0))
        return Isometry(boost @ rotation)
