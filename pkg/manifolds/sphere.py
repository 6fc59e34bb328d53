import math
from typing import Tuple

import numpy as np

from manifolds.base import (
    CUT_LOCUS_MARGIN,
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
from manifolds.euclidean import orthogonality_residual, random_orthogonal
from manifolds.exceptions import CutLocusError, InvalidIsometryError
from schemas.models import SpaceKind


class Sphere(ModelSpace):
    """Unit sphere S^n in R^(n+1) with the round metric."""

    kind = SpaceKind.SPHERE

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        return (self.dim + 1,)

    @property
    def curvature(self) -> CurvatureData:
        return CurvatureData(1.0, 1.0, math.pi)

    def origin(self) -> Array:
        e0 = np.zeros(self.dim + 1)
        e0[0] = 1.0
        return e0

    def check_point(self, q: Array) -> PointCheck:
        if not np.all(np.isfinite(q)):
            return PointCheck(False, math.inf, "coordinates must be finite")
        residual = abs(float(np.linalg.norm(q)) - 1.0)
        if residual <= POINT_TOLERANCE:
            return PointCheck(True, residual)
        return PointCheck(False, residual, f"point is not on the unit sphere: | |x| - 1 | = {residual:.3e}")

    def tangent_residual(self, x: Array, v: Array) -> float:
        return abs(float(x @ v))

    def inner(self, x: Array, u: Array, v: Array) -> float:
        return float(u @ v)

    def project_tangent(self, x: Array, w: Array) -> Array:
        return w - (x @ w) * x

    def _chord(self, x: Array, p: Array):
        """Angle between x and p together with the unnormalized log direction."""
        c = float(np.clip(x @ p, -1.0, 1.0))
        w = p - c * x
        w = w - (x @ w) * x
        s = float(np.linalg.norm(w))
        # same value as arccos(c), without the loss of accuracy near 0 and pi
        return math.atan2(s, c), w, s

    def exp(self, x: Array, v: Array) -> Array:
        t = float(np.linalg.norm(v))
        if t == 0.0:
            return np.array(x, dtype=np.float64)
        y = math.cos(t) * x + (math.sin(t) / t) * v
        return y / np.linalg.norm(y)

    def log(self, x: Array, p: Array) -> Array:
        theta, w, s = self._chord(x, p)
        if theta > math.pi - CUT_LOCUS_MARGIN:
            raise CutLocusError(x, p, detail="antipodal points")
        if s == 0.0:
            return np.zeros_like(x, dtype=np.float64)
        return (theta / s) * w

    def dist(self, x: Array, p: Array) -> float:
        return self._chord(x, p)[0]

    def transport(self, x: Array, y: Array, v: Array) -> Array:
        denom = 1.0 + float(x @ y)
        if denom <= 0.0:
            raise CutLocusError(x, y, detail="transport between antipodal points")
        return v - (float(y @ v) / denom) * (x + y)

    def exp_batch(self, x: Array, vs: Array) -> Array:
        t = np.linalg.norm(vs, axis=1)
        safe = np.where(t > 0.0, t, 1.0)
        coef = np.where(t > 0.0, np.sin(t) / safe, 1.0)
        ys = np.cos(t)[:, None] * x[None, :] + coef[:, None] * vs
        return ys / np.linalg.norm(ys, axis=1)[:, None]

    def dist_batch(self, xs: Array, p: Array) -> Array:
        c = np.clip(xs @ p, -1.0, 1.0)
        w = p[None, :] - c[:, None] * xs
        return np.arctan2(np.linalg.norm(w, axis=1), c)

    def check_isometry(self, g: Isometry) -> None:
        size = self.dim + 1
        if g.matrix.shape != (size, size):
            raise InvalidIsometryError(f"expected a {size}x{size} matrix, got shape {g.matrix.shape}")
        residual = orthogonality_residual(g.matrix)
        if residual > MATRIX_TOLERANCE:
            raise InvalidIsometryError(f"matrix is not orthogonal (residual {residual:.3e})")

    def apply_isometry(self, g: Isometry, q: Array) -> Array:
        self.check_isometry(g)
        return g.matrix @ q

    def push_tangent(self, g: Isometry, v: Array) -> Array:
        return g.matrix @ v

    def identity_isometry(self) -> Isometry:
        return Isometry(np.eye(self.dim + 1))

    def random_isometry(self, seed: SeedLike = None) -> Isometry:
        return Isometry(random_orthogonal(self.dim + 1, as_generator(seed)))
