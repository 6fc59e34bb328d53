# Model spaces, weighted samples and the averaged-log vector field
from manifolds.base import CurvatureData, Isometry, ModelSpace, PointCheck
from manifolds.euclidean import EuclideanSpace
from manifolds.factory import create_space
from manifolds.hyperboloid import Hyperboloid, lorentz_boost, minkowski_inner
from manifolds.rotations import SpecialOrthogonal
from manifolds.sample import WeightedSample
from manifolds.sphere import Sphere

__all__ = [
    "CurvatureData", "Isometry", "ModelSpace", "PointCheck",
    "EuclideanSpace", "Sphere", "Hyperboloid", "SpecialOrthogonal",
    "WeightedSample", "create_space", "lorentz_boost", "minkowski_inner",
]
