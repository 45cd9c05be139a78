"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A guarded combinatorial operation would exceed its configured size cap."""


class UndefinedMetricError(ValueError):
    """A metric (e.g. the ROC quality index) is undefined for the given inputs."""


class NoDesignableTargetError(RuntimeError):
    """Target selection found no structure with at least one designing sequence."""
