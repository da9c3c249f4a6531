"""Exception hierarchy shared across the package."""


class CertError(Exception):
    """Base class for every error raised by cslscert."""


class AutomatonError(CertError, ValueError):
    pass


class NotStronglyConnected(AutomatonError):
    pass


class DanglingNode(AutomatonError):
    pass


class BadLabel(AutomatonError):
    pass


class DuplicateEdge(AutomatonError):
    pass


class ConvergenceFailure(CertError, ArithmeticError):
    pass


class NotPositiveDefinite(CertError, ValueError):
    pass


class DomainError(CertError, ValueError):
    pass


class TooManyWords(CertError):
    """Raised when an enumeration would exceed the configured word budget."""


class IterationLimit(CertError):
    """The ellipsoid method ran out of iterations before deciding feasibility."""


class EmptyObservations(CertError, ValueError):
    pass


class TooFewSamples(CertError, ValueError):
    pass


class ParseError(CertError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NormError(ParseError):
    pass


class DimensionMismatch(ParseError):
    pass
