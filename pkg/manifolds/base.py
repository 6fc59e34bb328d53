from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, ClassVar, Iterable, List, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from manifolds.exceptions import InvalidPointError
from schemas.models import NormFlavor, SpaceKind

Array = npt.NDArray[np.float64]
SeedLike = Union[int, np.random.Generator, None]

# Point invariants (sphere norm, hyperboloid form).
POINT_TOLERANCE = 1e-12
# Orthogonality of SO(n) points, tangency of vectors, isometry identities.
MATRIX_TOLERANCE = 1e-10
# Distance to the cut locus below which log refuses to answer.
CUT_LOCUS_MARGIN = 1e-6


@dataclass(frozen=True)
class CurvatureData:
    """Sectional curvature bounds and injectivity radius of a model space."""
    kappa_min: float
    kappa_max: float
    injectivity_radius: float

    def __post_init__(self):
        if self.kappa_min > self.kappa_max:
            raise ValueError(f"kappa_min {self.kappa_min} exceeds kappa_max {self.kappa_max}")
        if not self.injectivity_radius > 0:
            raise ValueError(f"injectivity radius must be positive, got {self.injectivity_radius}")

    def admissible_radius(self) -> float:
        """Radius of a ball on which the center of mass is unique.

        min(inj/2, pi/(4*sqrt(kappa_max))) for positive curvature, inj/2 otherwise.
        """
        half = self.injectivity_radius / 2.0
        if self.kappa_max > 0:
            return min(half, math.pi / (4.0 * math.sqrt(self.kappa_max)))
        return half


@dataclass(frozen=True)
class PointCheck:
    """Result of checking a point or tangent vector against its invariant."""
    ok: bool
    residual: float = 0.0
    message: str = "ok"


@dataclass(frozen=True, eq=False)
class Isometry:
    """Isometry payload.

    `matrix` is the orthogonal (or Lorentz) matrix acting from the left;
    `translation` is used by Euclidean space, `right` by SO(n) where the
    action is Q -> matrix @ Q @ right.
    """
    matrix: Array
    translation: Optional[Array] = None
    right: Optional[Array] = None


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gram_schmidt(vectors: Iterable[Array], inner: Callable[[Array, Array], float], drop_below: float = 1e-8) -> List[Array]:
    """Orthonormalize `vectors` in order, skipping those (nearly) in the span of earlier ones."""
    basis: List[Array] = []
    for w in vectors:
        # two passes keep the basis orthogonal to rounding
        for _ in range(2):
            for b in basis:
                w = w - inner(b, w) * b
        length = math.sqrt(max(inner(w, w), 0.0))
        if length > drop_below:
            basis.append(w / length)
    return basis


class ModelSpace(ABC):
    """A model Riemannian manifold realized in an ambient vector space.

    Points and tangent vectors are numpy arrays of shape `ambient_shape`.
    Tangent vectors are always passed together with their base point.
    """

    kind: ClassVar[SpaceKind]

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dimension must be at least 1, got {dim}")
        self.dim = dim

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"

    @property
    @abstractmethod
    def ambient_shape(self) -> Tuple[int, ...]:
        ...

    @property
    @abstractmethod
    def curvature(self) -> CurvatureData:
        ...

    @property
    def norm_flavor(self) -> Optional[NormFlavor]:
        return None

    def admissible_radius(self, override: Optional[float] = None) -> float:
        if override is not None:
            return float(override)
        return self.curvature.admissible_radius()

    def riemannian(self) -> "ModelSpace":
        """The same space with its Riemannian norm."""
        return self

    # -- points -------------------------------------------------------------

    @abstractmethod
    def origin(self) -> Array:
        """Canonical base point."""

    @abstractmethod
    def check_point(self, q: Array) -> PointCheck:
        ...

    @abstractmethod
    def tangent_residual(self, x: Array, v: Array) -> float:
        ...

    def check_tangent(self, x: Array, v: Array) -> PointCheck:
        residual = self.tangent_residual(x, v)
        if residual <= MATRIX_TOLERANCE:
            return PointCheck(True, residual)
        return PointCheck(False, residual, f"vector is not tangent at the base point (residual {residual:.3e})")

    def as_point(self, coords, validate: bool = True) -> Array:
        """Reshape flat coordinates into an ambient point, optionally checking the invariant."""
        q = np.asarray(coords, dtype=np.float64)
        if q.size != math.prod(self.ambient_shape):
            raise InvalidPointError(f"expected {math.prod(self.ambient_shape)} coordinates, got {q.size}")
        q = q.reshape(self.ambient_shape).copy()
        if validate:
            check = self.check_point(q)
            if not check.ok:
                raise InvalidPointError(check.message, check.residual)
        return q

    def flatten(self, q: Array) -> List[float]:
        return np.asarray(q, dtype=np.float64).ravel().tolist()

    # -- metric -------------------------------------------------------------

    @abstractmethod
    def inner(self, x: Array, u: Array, v: Array) -> float:
        """Riemannian inner product of tangent vectors at x."""

    def norm(self, x: Array, v: Array) -> float:
        """Tangent norm; flavor-dependent on SO(n)."""
        return math.sqrt(max(self.inner(x, v, v), 0.0))

    @abstractmethod
    def project_tangent(self, x: Array, w: Array) -> Array:
        """Orthogonal projection of an ambient vector onto the tangent space at x."""

    def tangent_basis(self, x: Array) -> List[Array]:
        """Orthonormal tangent basis at x from the projected ambient coordinate vectors."""
        size = math.prod(self.ambient_shape)
        units = np.eye(size).reshape((size,) + self.ambient_shape)
        basis = gram_schmidt(
            (self.project_tangent(x, e) for e in units),
            lambda u, v: self.inner(x, u, v),
        )
        if len(basis) != self.dim:
            raise ValueError(f"tangent basis has {len(basis)} vectors, expected {self.dim}")
        return basis

    def random_tangent(self, x: Array, seed: SeedLike = None) -> Array:
        """Unit tangent vector at x with uniformly distributed direction."""
        rng = as_generator(seed)
        coeffs = rng.standard_normal(self.dim)
        coeffs /= np.linalg.norm(coeffs)
        return sum(c * b for c, b in zip(coeffs, self.tangent_basis(x)))

    # -- geodesics ----------------------------------------------------------

    @abstractmethod
    def exp(self, x: Array, v: Array) -> Array:
        ...

    @abstractmethod
    def log(self, x: Array, p: Array) -> Array:
        """Initial velocity of the minimizing geodesic from x to p; raises CutLocusError."""

    @abstractmethod
    def dist(self, x: Array, p: Array) -> float:
        ...

    @abstractmethod
    def transport(self, x: Array, y: Array, v: Array) -> Array:
        """Parallel transport of v from x to y along the minimizing geodesic."""

    def exp_batch(self, x: Array, vs: Array) -> Array:
        return np.stack([self.exp(x, v) for v in vs])

    def dist_batch(self, xs: Array, p: Array) -> Array:
        return np.array([self.dist(x, p) for x in xs], dtype=np.float64)

    # -- isometries ---------------------------------------------------------

    @abstractmethod
    def check_isometry(self, g: Isometry) -> None:
        """Raise InvalidIsometryError unless g satisfies the defining identities."""

    @abstractmethod
    def apply_isometry(self, g: Isometry, q: Array) -> Array:
        ...

    @abstractmethod
    def push_tangent(self, g: Isometry, v: Array) -> Array:
        """Differential of g applied to ambient tangent coordinates."""

    @abstractmethod
    def identity_isometry(self) -> Isometry:
        ...

    @abstractmethod
    def random_isometry(self, seed: SeedLike = None) -> Isometry:
        ...

    # -- sampling -----------------------------------------------------------

    def random_point_in_ball(self, center: Array, r: float, seed: SeedLike = None,
                             radius_override: Optional[float] = None) -> Array:
        """exp(center, v) with v uniform in the tangent ball of radius r."""
        r_max = self.admissible_radius(radius_override)
        if not 0 < r <= r_max:
            raise ValueError(f"radius {r} outside (0, {r_max}]")
        rng = as_generator(seed)
        direction = rng.standard_normal(self.dim)
        direction /= np.linalg.norm(direction)
        length = r * rng.random() ** (1.0 / self.dim)
        v = sum(length * c * b for c, b in zip(direction, self.tangent_basis(center)))
        return self.exp(center, v)
