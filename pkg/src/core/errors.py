"""Exception hierarchy shared by every edgetune module."""


class EdgeTuneError(Exception):
    """Base class for all edgetune errors."""


class InvalidModeError(EdgeTuneError, KeyError):
    """A power mode or dimension value is not on the grid."""

    def __str__(self) -> str:
        # KeyError quotes its message; keep it readable.
        return str(self.args[0]) if self.args else ""


class BudgetExhaustedError(EdgeTuneError, RuntimeError):
    """A profiling session has no trials left for a new measurement."""


class CalibrationError(EdgeTuneError, ValueError):
    """Anchors cannot be fitted by a monotone cost surface."""


class InsufficientDataError(EdgeTuneError, ValueError):
    """Too few samples to train a surrogate regressor."""


class TraceError(EdgeTuneError, ValueError):
    """An arrival trace is empty or malformed."""


class ConfigError(EdgeTuneError, ValueError):
    """A sweep or problem configuration references unknown names."""
