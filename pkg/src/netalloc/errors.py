"""Exception types shared across the package."""


class NetallocError(Exception):
    """Base class for package errors."""


class InvalidParameterError(NetallocError, ValueError):
    """An argument violates a precondition (bad n/m/k, odd ring degree, ...)."""


class InvalidInputError(NetallocError, ValueError):
    """Input data violates a contract (non-binary treatments, z outside [0,1])."""


class ParseError(NetallocError, ValueError):
    """A data file is malformed. Carries the offending 1-based line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ShapeError(NetallocError, ValueError):
    """Array dimensions are mutually inconsistent."""


class TrainingDivergedError(NetallocError, RuntimeError):
    """A loss became non-finite during training. Carries the epoch."""

    def __init__(self, epoch, message="training diverged"):
        self.epoch = epoch
        super().__init__(f"{message} at epoch {epoch}")


class EnumerationCapError(NetallocError, ValueError):
    """Exhaustive search refused because the candidate count exceeds the cap."""

    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(
            f"exhaustive search over {count} allocations exceeds cap {cap}"
        )


class InfeasibleSearchError(NetallocError, RuntimeError):
    """A search never produced a budget-feasible candidate."""


class UndefinedMetricError(NetallocError, ZeroDivisionError):
    """A ratio metric has a zero denominator."""


class InvalidComparisonError(NetallocError, ValueError):
    """Two results are not comparable (e.g. different budgets)."""


class ConfigError(NetallocError, ValueError):
    """An experiment config is invalid (unknown key, bad value, missing file)."""


class StageDependencyError(NetallocError, RuntimeError):
    """A pipeline stage was invoked before the stage that produces its inputs."""
