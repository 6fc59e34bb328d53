from typing import Optional


class CenterOfMassError(Exception):
    """Base class for all errors raised by the center of mass library."""


class InvalidPointError(CenterOfMassError, ValueError):
    """A point violates the defining invariant of its manifold."""

    def __init__(self, message: str, residual: float = float("nan"), index: Optional[int] = None):
        self.residual = residual
        self.index = index
        prefix = f"point {index}: " if index is not None else ""
        super().__init__(f"{prefix}{message}")


class CutLocusError(CenterOfMassError):
    """The logarithm was requested for a pair of points in each other's cut locus."""

    def __init__(self, x, p, index: Optional[int] = None, detail: str = ""):
        self.x = x
        self.p = p
        self.index = index
        self.detail = detail
        where = f" (sample index {index})" if index is not None else ""
        extra = f": {detail}" if detail else ""
        super().__init__(f"point {p.ravel().tolist()} lies in the cut locus of {x.ravel().tolist()}{where}{extra}")

    def with_index(self, index: int) -> "CutLocusError":
        return CutLocusError(self.x, self.p, index=index, detail=self.detail)


class MassNormalizationError(CenterOfMassError, ValueError):
    """Masses are not positive or do not sum to one."""

    def __init__(self, message: str, total: float = float("nan")):
        self.total = total
        super().__init__(message)


class EmptySampleError(CenterOfMassError, ValueError):
    """A weighted sample without points."""


class DegenerateMeanError(CenterOfMassError):
    """The ambient mean is too close to zero to be projected back to the sphere."""


class StepTooLargeError(CenterOfMassError, ValueError):
    """Finite difference step outside the admissible range."""


class UnsupportedSpaceError(CenterOfMassError, ValueError):
    """The requested operation is not defined on this model space."""


class InvalidIsometryError(CenterOfMassError, ValueError):
    """An isometry payload fails its defining matrix identities."""


class ProblemSpecError(CenterOfMassError, ValueError):
    """A problem file could not be parsed or validated."""
