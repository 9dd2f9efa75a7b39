"""Exception hierarchy shared by every pmns module."""


class PMNSError(Exception):
    """Base class for all library errors."""


class ParameterError(PMNSError, ValueError):
    """An argument lies outside the admissible range of an operation."""


class GridMismatchError(PMNSError, ValueError):
    """Two fields or trajectories live on different lattices."""


class SymmetryError(PMNSError, ValueError):
    """A spectral field that should describe a real field is not Hermitian."""

    def __init__(self, message, max_deviation):
        super().__init__(message)
        self.max_deviation = max_deviation


class UnsupportedRescaleError(ParameterError):
    """Rescaling factor does not map the lattice into itself."""


class KnotError(PMNSError, ValueError):
    """A requested time is not one of the stored knots."""


class SingularPointError(ParameterError):
    """Evaluation requested at the singular point of a closed-form solution."""


class SmallnessError(ParameterError):
    """Data violate the contraction smallness condition."""

    def __init__(self, message, data_norm, threshold):
        super().__init__(message)
        self.data_norm = data_norm
        self.threshold = threshold


class ConvergenceError(PMNSError):
    """Fixed-point iteration did not converge; carries the diagnostics."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StepRejectedError(PMNSError):
    """A time step's local error estimate exceeded the budget."""
