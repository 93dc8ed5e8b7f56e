"""Exception hierarchy.  Every error raised on purpose derives from PBracketError."""


class PBracketError(Exception):
    """Base class for all library errors."""


class LabelError(PBracketError, KeyError):
    """An outcome or state label is not part of the space."""

    def __str__(self):
        return Exception.__str__(self)


class ZeroEvidenceError(PBracketError, ZeroDivisionError):
    """Conditioning on an event of probability zero."""


class PartitionError(PBracketError):
    """Blocks overlap or do not cover the sample space."""

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome


class TotalityError(PBracketError):
    """An observable has no value for some outcome."""


class ObservableError(PBracketError):
    """An observable cannot be formed (e.g. non-numeric coordinate labels)."""


class DomainError(PBracketError, ValueError):
    """A parameter is outside the domain of the operation."""


class AlignmentError(PBracketError):
    """State labels (or orientations) of a vector and an operator disagree."""


class OrientationError(AlignmentError):
    """A row vector was supplied where a column vector is required, or vice versa."""


class ConvergenceError(PBracketError):
    """An iterative method did not converge; ``last`` holds the final iterate."""

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class IntegrationError(PBracketError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DivergenceError(IntegrationError):
    """An expectation integral does not converge absolutely."""


class ModelError(PBracketError):
    """A model file is malformed or references undefined names."""


class EvaluationError(PBracketError):
    """A bracket expression cannot be evaluated against a model."""


class ParseError(PBracketError):
    """Syntax error in a bracket expression."""

    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += "; expected one of: " + ", ".join(sorted(self.expected))
        super().__init__(detail)
