"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PiboError(Exception):
    """Base class for every error raised by this package."""


class BoundsError(PiboError, IndexError):
    """A grid index lies outside its axis."""


class CapacityError(PiboError, ValueError):
    """More distinct points were requested than the space holds."""


class PreconditionError(PiboError, ValueError):
    """An operation was called with inputs violating its contract."""


class IllConditionedError(PiboError):
    """Cholesky factorization failed even after jitter escalation."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


class ExhaustedError(PiboError):
    """No unvisited candidate is left in the search space."""


class GeometryError(PiboError, ValueError):
    """A stack-up point is not physically realizable."""


class DataIntegrityError(PiboError):
    """Two observations of the same point disagree."""


class ObjectiveError(PiboError):
    """The objective raised while a run was in progress.

    ``trace`` holds every evaluation completed before the failure and
    ``worker_id`` identifies the failing worker for parallel runs.
    """

    def __init__(self, message: str, trace=None, worker_id: int | None = None):
        super().__init__(message)
        self.trace = trace
        self.worker_id = worker_id

    def __reduce__(self):
        return (type(self), (str(self), self.trace, self.worker_id))


class ConfigError(PiboError, ValueError):
    """A run configuration file failed validation."""
