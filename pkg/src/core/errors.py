# src/core/errors.py


class OscitomError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(OscitomError, ValueError):
    """A parameter lies outside the domain of the operation."""


class OrderOutOfRangeError(DomainError):
    def __init__(self, order: int, max_order: int):
        self.order = order
        self.max_order = max_order
        super().__init__(f"Hermite order {order} outside [0, {max_order}]")


class GridTooSmallError(OscitomError):
    """The quadrature grid does not hold the probability mass it should."""

    def __init__(self, what: str, deficit: float, half_width: float, points: int):
        self.deficit = deficit
        self.half_width = half_width
        self.points = points
        super().__init__(
            f"{what}: deficit {deficit:.3e} on grid [-{half_width:.6g}, {half_width:.6g}] "
            f"with {points} points; widen or refine the grid"
        )


class NumericalFailureError(OscitomError):
    """Roundoff cannot explain the result; grid or state is inconsistent."""


class QuadratureFailureError(NumericalFailureError):
    pass


class SupportMismatchError(NumericalFailureError):
    def __init__(self, index, point, joint: float):
        self.index = index
        self.point = point
        super().__init__(
            f"joint density {joint:.3e} at grid point {tuple(point)} (index {tuple(index)}) "
            f"where a marginal vanishes"
        )


class UsageError(OscitomError):
    """Command-line contract violation detected before any computation."""
