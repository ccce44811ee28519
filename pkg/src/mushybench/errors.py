"""Exception hierarchy shared by every stage of the benchmark."""


class MushyBenchError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MushyBenchError, ValueError):
    """Invalid input parameters (material file, scenario, grid)."""


class DomainError(MushyBenchError, ValueError):
    """Argument outside the domain where a formula is defined."""


class DegenerateCoefficientsError(MushyBenchError, ValueError):
    """Closed-form liquid fraction requested with a == 0 or p == 0."""


class InversionError(MushyBenchError):
    """Enthalpy could not be bracketed in the mushy temperature interval."""


class IntegrationError(MushyBenchError):
    """ODE march produced non-finite values."""


class EvaluationError(MushyBenchError):
    """Non-finite intermediate while evaluating a closed-form expression."""


class RootNotFoundError(MushyBenchError):
    """No sign change located in the scanned range.

    ``scan`` holds the (argument, residual) pairs that were examined.
    """

    def __init__(self, message, scan=()):
        super().__init__(message)
        self.scan = list(scan)


class AmbiguousRootError(MushyBenchError):
    """More than one sign change found; ``brackets`` lists all of them."""

    def __init__(self, message, brackets=()):
        super().__init__(message)
        self.brackets = list(brackets)


class FrontAmbiguityError(MushyBenchError, ValueError):
    """A one-sided quantity was requested exactly at a front without a side."""


class AssemblyError(MushyBenchError):
    """Non-finite coefficient while assembling the tri-diagonal system."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SolverError(MushyBenchError):
    """Tri-diagonal elimination failed (zero pivot or lost dominance)."""


class PartialResultsError(MushyBenchError):
    """Run stopped on its wall-clock budget; ``partial`` holds what was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ReportError(MushyBenchError):
    """Comparison report cannot be formed from the supplied data."""
