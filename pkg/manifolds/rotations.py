import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm, schur
from scipy.spatial.transform import Rotation
from scipy.stats import special_ortho_group

from manifolds.base import (
    CUT_LOCUS_MARGIN,
    MATRIX_TOLERANCE,
    Array,
    CurvatureData,
    Isometry,
    ModelSpace,
    PointCheck,
    SeedLike,
    as_generator,
)
from manifolds.euclidean import orthogonality_residual
from manifolds.exceptions import CutLocusError, InvalidIsometryError, UnsupportedSpaceError
from schemas.models import MAX_ROTATION_SIZE, NormFlavor, SpaceKind, rotation_size_from_dim

# Bi-invariant metric <A,B> = tr(A^T B): the largest sectional curvature is
# |[X,Y]|^2 / (4 |X|^2 |Y|^2) = 1/8 for orthonormal generators of adjacent planes.
FROBENIUS_KAPPA_MAX = 1.0 / 8.0
# A rotation by pi in one plane lies at distance pi * sqrt(2).
FROBENIUS_INJECTIVITY_RADIUS = math.pi * math.sqrt(2.0)
# Placeholder ratio between operator-norm and Frobenius admissible radii.
OPERATOR_RADIUS_FACTOR = math.pi / 2.0
# Half the operator-norm injectivity radius pi.
OPERATOR_RADIUS_CAP = math.pi / 2.0


def skew(a: Array) -> Array:
    return 0.5 * (a - a.T)


def hat(omega: Array) -> Array:
    """3-vector to skew matrix, so that hat(w) @ v == cross(w, v)."""
    wx, wy, wz = omega
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


def vee(a: Array) -> Array:
    return np.array([a[2, 1], a[0, 2], a[1, 0]])


def _schur_blocks(r: Array) -> Tuple[Array, Array, List[float], int]:
    """Real Schur form of an orthogonal matrix split into plane rotations.

    Returns the Schur vectors, the block-diagonal skew log (principal angles),
    the list of plane angles and the number of -1 eigenvalues.
    """
    t, z = schur(r, output="real")
    n = r.shape[0]
    log_blocks = np.zeros((n, n))
    angles: List[float] = []
    minus_ones = 0
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            c = 0.5 * (t[i, i] + t[i + 1, i + 1])
            s = 0.5 * (t[i + 1, i] - t[i, i + 1])
            theta = math.atan2(s, c)
            log_blocks[i + 1, i] = theta
            log_blocks[i, i + 1] = -theta
            angles.append(abs(theta))
            i += 2
        else:
            if t[i, i] < 0.0:
                minus_ones += 1
            i += 1
    # pairs of -1 eigenvalues are planes rotated by pi
    angles.extend([math.pi] * (minus_ones // 2))
    return z, log_blocks, angles, minus_ones


def rotation_angles(r: Array) -> List[float]:
    """Plane rotation angles in [0, pi] of an orthogonal matrix with positive determinant."""
    n = r.shape[0]
    if n == 2:
        return [abs(math.atan2(r[1, 0], r[0, 0]))]
    if n == 3:
        return [float(Rotation.from_matrix(r).magnitude())]
    return _schur_blocks(r)[2]


def expm_skew(a: Array) -> Array:
    n = a.shape[0]
    if n == 2:
        theta = a[1, 0]
        c, s = math.cos(theta), math.sin(theta)
        return np.array([[c, -s], [s, c]])
    if n == 3:
        return Rotation.from_rotvec(vee(a)).as_matrix()
    return expm(a)


def logm_rotation(r: Array) -> Array:
    """Principal logarithm of a rotation; raises ValueError near angle pi."""
    n = r.shape[0]
    limit = math.pi - CUT_LOCUS_MARGIN
    if n == 2:
        theta = math.atan2(r[1, 0], r[0, 0])
        if abs(theta) > limit:
            raise ValueError(f"rotation angle {abs(theta):.9f} too close to pi")
        return np.array([[0.0, -theta], [theta, 0.0]])
    if n == 3:
        rotvec = Rotation.from_matrix(r).as_rotvec()
        theta = float(np.linalg.norm(rotvec))
        if theta > limit:
            raise ValueError(f"rotation angle {theta:.9f} too close to pi")
        return hat(rotvec)
    z, log_blocks, angles, _ = _schur_blocks(r)
    if angles and max(angles) > limit:
        raise ValueError(f"rotation angle {max(angles):.9f} too close to pi")
    return skew(z @ log_blocks @ z.T)


class SpecialOrthogonal(ModelSpace):
    """SO(n) with its bi-invariant connection.

    The Frobenius flavor is the Riemannian metric tr(A^T B); the operator flavor
    measures tangent vectors and distances with the spectral norm (a Finsler
    metric for the same connection). Both share exp, log and transport.
    """

    kind = SpaceKind.SPECIAL_ORTHOGONAL

    def __init__(self, n: int, norm_flavor: NormFlavor = NormFlavor.FROBENIUS):
        if not 2 <= n <= MAX_ROTATION_SIZE:
            raise UnsupportedSpaceError(f"SO(n) is supported for 2 <= n <= {MAX_ROTATION_SIZE}, got n={n}")
        super().__init__(n * (n - 1) // 2)
        self.n = n
        self._flavor = NormFlavor(norm_flavor)

    @classmethod
    def from_dim(cls, dim: int, norm_flavor: Optional[NormFlavor] = None) -> "SpecialOrthogonal":
        n = rotation_size_from_dim(dim)
        if n is None:
            raise UnsupportedSpaceError(f"dim {dim} is not n(n-1)/2 for a supported n")
        return cls(n, norm_flavor or NormFlavor.FROBENIUS)

    def __repr__(self) -> str:
        return f"SpecialOrthogonal(n={self.n}, norm_flavor={self._flavor.value})"

    @property
    def norm_flavor(self) -> NormFlavor:
        return self._flavor

    @property
    def ambient_shape(self) -> Tuple[int, ...]:
        return (self.n, self.n)

    @property
    def curvature(self) -> CurvatureData:
        return CurvatureData(0.0, FROBENIUS_KAPPA_MAX, FROBENIUS_INJECTIVITY_RADIUS)

    def admissible_radius(self, override: Optional[float] = None) -> float:
        if override is not None:
            return float(override)
        radius = self.curvature.admissible_radius()
        if self._flavor == NormFlavor.OPERATOR:
            return min(OPERATOR_RADIUS_FACTOR * radius, OPERATOR_RADIUS_CAP)
        return radius

    def riemannian(self) -> "SpecialOrthogonal":
        if self._flavor == NormFlavor.FROBENIUS:
            return self
        return SpecialOrthogonal(self.n, NormFlavor.FROBENIUS)

    def origin(self) -> Array:
        return np.eye(self.n)

    def check_point(self, q: Array) -> PointCheck:
        if not np.all(np.isfinite(q)):
            return PointCheck(False, math.inf, "coordinates must be finite")
        residual = orthogonality_residual(q)
        if residual > MATRIX_TOLERANCE:
            return PointCheck(False, residual, f"matrix is not orthogonal: |Q^T Q - I|_F = {residual:.3e}")
        if np.linalg.det(q) <= 0.0:
            return PointCheck(False, residual, "matrix has negative determinant")
        return PointCheck(True, residual)

    def tangent_residual(self, x: Array, v: Array) -> float:
        a = x.T @ v
        return float(np.linalg.norm(0.5 * (a + a.T)))

    def inner(self, x: Array, u: Array, v: Array) -> float:
        return float(np.sum(u * v))

    def norm(self, x: Array, v: Array) -> float:
        if self._flavor == NormFlavor.OPERATOR:
            return float(np.linalg.norm(x.T @ v, 2))
        return float(np.linalg.norm(v))

    def project_tangent(self, x: Array, w: Array) -> Array:
        return x @ skew(x.T @ w)

    def exp(self, x: Array, v: Array) -> Array:
        return x @ expm_skew(skew(x.T @ v))

    def log(self, x: Array, p: Array) -> Array:
        try:
            return x @ logm_rotation(x.T @ p)
        except ValueError as exc:
            raise CutLocusError(x, p, detail=str(exc)) from exc

    def _norm_of_angles(self, angles: List[float]) -> float:
        if not angles:
            return 0.0
        if self._flavor == NormFlavor.OPERATOR:
            return max(angles)
        return math.sqrt(2.0 * sum(a * a for a in angles))

    def dist(self, x: Array, p: Array) -> float:
        return self._norm_of_angles(rotation_angles(x.T @ p))

    def transport(self, x: Array, y: Array, v: Array) -> Array:
        w = x.T @ self.log(x, y)
        half = expm_skew(0.5 * w)
        return x @ half @ (x.T @ v) @ half

    def exp_batch(self, x: Array, vs: Array) -> Array:
        if self.n != 3:
            return super().exp_batch(x, vs)
        gens = np.einsum("ji,mjk->mik", x, vs)
        rotvecs = np.stack([gens[:, 2, 1] - gens[:, 1, 2], gens[:, 0, 2] - gens[:, 2, 0], gens[:, 1, 0] - gens[:, 0, 1]], axis=1) / 2.0
        return np.einsum("ij,mjk->mik", x, Rotation.from_rotvec(rotvecs).as_matrix())

    def dist_batch(self, xs: Array, p: Array) -> Array:
        if self.n != 3:
            return super().dist_batch(xs, p)
        angles = Rotation.from_matrix(np.einsum("mji,jk->mik", xs, p)).magnitude()
        if self._flavor == NormFlavor.OPERATOR:
            return angles
        return math.sqrt(2.0) * angles

    def check_isometry(self, g: Isometry) -> None:
        shape = (self.n, self.n)
        if g.right is None or g.matrix.shape != shape or g.right.shape != shape:
            raise InvalidIsometryError(f"expected a pair of {self.n}x{self.n} matrices (L, R)")
        for name, m in (("L", g.matrix), ("R", g.right)):
            residual = orthogonality_residual(m)
            if residual > MATRIX_TOLERANCE:
                raise InvalidIsometryError(f"{name} is not orthogonal (residual {residual:.3e})")
        if np.linalg.det(g.matrix) * np.linalg.det(g.right) <= 0.0:
            raise InvalidIsometryError("L and R must have determinants of equal sign")

    def apply_isometry(self, g: Isometry, q: Array) -> Array:
        self.check_isometry(g)
        return g.matrix @ q @ g.right

    def push_tangent(self, g: Isometry, v: Array) -> Array:
        return g.matrix @ v @ g.right

    def identity_isometry(self) -> Isometry:
        return Isometry(np.eye(self.n), right=np.eye(self.n))

    def random_isometry(self, seed: SeedLike = None) -> Isometry:
        rng = as_generator(seed)
        left = special_ortho_group.rvs(self.n, random_state=rng)
        right = special_ortho_group.rvs(self.n, random_state=rng)
        return Isometry(left, right=right)
