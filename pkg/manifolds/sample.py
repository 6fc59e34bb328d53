from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from manifolds.base import Array, ModelSpace
from manifolds.exceptions import EmptySampleError, InvalidPointError, MassNormalizationError

# Largest deviation of the mass sum from 1 that is silently renormalized.
MASS_SUM_SLACK = 1e-6


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Mass points p_i (stacked along axis 0) with masses m_i summing to one."""
    points: Array
    masses: Array

    def __post_init__(self):
        if len(self.points) == 0:
            raise EmptySampleError("a weighted sample needs at least one point")
        if len(self.points) != len(self.masses):
            raise MassNormalizationError(f"{len(self.masses)} masses for {len(self.points)} points")

    @classmethod
    def from_arrays(cls, space: ModelSpace, points, masses: Optional[Sequence[float]] = None) -> "WeightedSample":
        """Validate points against `space` and normalize masses.

        Masses default to uniform. A sum within 1e-6 of one is renormalized,
        anything further off is rejected.
        """
        pts = np.asarray(points, dtype=np.float64)
        count = pts.shape[0] if pts.ndim > 0 else 0
        if count == 0:
            raise EmptySampleError("a weighted sample needs at least one point")
        try:
            pts = pts.reshape((count,) + space.ambient_shape).copy()
        except ValueError as exc:
            raise InvalidPointError(
                f"points of shape {np.shape(points)} do not fit the ambient shape {space.ambient_shape}"
            ) from exc
        for i, p in enumerate(pts):
            check = space.check_point(p)
            if not check.ok:
                raise InvalidPointError(check.message, check.residual, index=i)

        if masses is None:
            m = np.full(count, 1.0 / count)
        else:
            m = np.asarray(masses, dtype=np.float64)
            if m.shape != (count,):
                raise MassNormalizationError(f"{m.size} masses for {count} points")
        if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
            raise MassNormalizationError("masses must be finite and positive")
        total = math.fsum(m)
        if abs(total - 1.0) > MASS_SUM_SLACK:
            raise MassNormalizationError(f"masses sum to {total!r}, expected 1 (tolerance {MASS_SUM_SLACK:g})", total)
        return cls(pts, m / total)

    def __len__(self) -> int:
        return len(self.masses)

    def canonical(self) -> "WeightedSample":
        """Pairs (p_i, m_i) sorted lexicographically by coordinates, then mass."""
        flat = self.points.reshape(len(self), -1)
        keys = [self.masses] + [flat[:, j] for j in range(flat.shape[1] - 1, -1, -1)]
        order = np.lexsort(keys)
        return WeightedSample(self.points[order].copy(), self.masses[order].copy())

    def with_masses(self, masses: Sequence[float]) -> "WeightedSample":
        m = np.asarray(masses, dtype=np.float64)
        return WeightedSample(self.points.copy(), m / math.fsum(m))

    def map_points(self, fn: Callable[[Array], Array]) -> "WeightedSample":
        """Apply `fn` to every point, keeping the masses."""
        return WeightedSample(np.stack([fn(p) for p in self.points]), self.masses.copy())
