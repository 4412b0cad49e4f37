"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user input: bad node ids, malformed files, inconsistent config."""


class EstimatorUndefinedError(RuntimeError):
    """Raised when an estimator has no defined value on the given sample,
    e.g. no cross-group recruitments were observed in one direction."""
