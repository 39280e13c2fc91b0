"""Exception hierarchy shared by the numerical library and the CLI."""


class ConfigError(Exception):
    """Experiment configuration is invalid."""

    pass


class ChainSpecError(ValueError):
    """Chain, field or disorder specification violates its invariants."""

    pass


class FitError(ValueError):
    """Scaling fit cannot be performed on the given samples."""

    pass


class NumericalError(Exception):
    """Numerical routine failed to produce a trustworthy result."""

    pass


class DiagonalizationError(NumericalError):
    """Singular value or eigenvalue solver did not converge."""

    pass


class PfaffianError(NumericalError):
    """Matrix is not a valid even-dimensional skew-symmetric matrix."""

    pass


class CorrelatorRangeError(NumericalError):
    """A spin correlator left the physical interval [-1, 1]."""

    pass


class EnsembleError(NumericalError):
    """Too many disorder realizations failed."""

    pass
