"""Exception types shared across the toolkit."""


class EnumerationGuardError(RuntimeError):
    """Raised when a combinatorial routine would enumerate too many subsets."""


class ParameterWindowError(ValueError):
    """Raised when an isometry-constant or step-parameter hypothesis fails.

    The message names the violated inequality so callers (and the CLI) can
    report exactly which condition excluded the requested configuration.
    """
