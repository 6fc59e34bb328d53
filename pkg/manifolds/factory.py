from manifolds.base import ModelSpace
from manifolds.euclidean import EuclideanSpace
from manifolds.hyperboloid import Hyperboloid
from manifolds.rotations import SpecialOrthogonal
from manifolds.sphere import Sphere
from schemas.models import ManifoldSpec, SpaceKind


def create_space(spec: ManifoldSpec) -> ModelSpace:
    """Instantiate the model space described by a manifold section."""
    if spec.kind == SpaceKind.EUCLIDEAN:
        return EuclideanSpace(spec.dim)
    if spec.kind == SpaceKind.SPHERE:
        return Sphere(spec.dim)
    if spec.kind == SpaceKind.HYPERBOLOID:
        return Hyperboloid(spec.dim)
    return SpecialOrthogonal.from_dim(spec.dim, spec.norm_flavor)
