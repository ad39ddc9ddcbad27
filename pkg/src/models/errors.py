"""Error types shared by the simulator services."""


class GridMismatchError(ValueError):
    """Operands live on different grids."""


class NumericalInstabilityError(RuntimeError):
    """Non-finite values appeared while stepping."""

    def __init__(self, message: str, t: float = float('nan'), step_count: int = 0):
        super().__init__(message)
        self.t = t
        self.step_count = step_count


class GroundStateCollapseError(RuntimeError):
    """The ground-state iterate collapsed to zero."""


class InsufficientSamplesError(ValueError):
    """Too few cadence points or snapshots for a finite-difference diagnostic."""
