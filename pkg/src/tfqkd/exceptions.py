"""Exception types shared across the package."""


class TFQKDError(Exception):
    """Base class for all package errors."""


class ConfigError(TFQKDError, ValueError):
    """Invalid parameters. ``violations`` lists every rule that failed."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UndefinedInputError(TFQKDError, ValueError):
    pass


class GridTooCoarseError(TFQKDError, ValueError):
    pass


class KeyAbort(TFQKDError):
    """Raised when the protocol cannot certify a key at all.

    ``reason`` is a short machine-readable code, ``detail`` a human message.
    """

    INFEASIBLE_CUTOFF = "infeasible_cutoff"
    NO_SINGLE_PHOTON_BOUND = "no_single_photon_bound"
    DISTANCE_THRESHOLD_EXCEEDED = "distance_threshold_exceeded"

    def __init__(self, reason, detail=""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)
