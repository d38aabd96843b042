"""Exception types shared across the toolkit.

The command line front end maps these onto exit codes: formula violations
and failed theorem pipelines are "mathematical" failures (exit 1), while
schema, domain, admissibility and conditioning problems are "invalid
input" failures (exit 2).
"""

from __future__ import annotations


class FinslerError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(FinslerError):
    """A JSON document does not match the expected schema."""


class EvaluationDomainError(FinslerError):
    """An expression was evaluated outside its validity domain.

    Carries the offending node and, when available, the evaluation point.
    """

    def __init__(self, message: str, node=None, point=None):
        super().__init__(message)
        self.node = node
        self.point = point


class OracleFailureError(FinslerError):
    """A finite-difference oracle produced a non-finite intermediate."""


class MetricDegeneracyError(FinslerError):
    """The fundamental tensor failed to be positive definite."""

    def __init__(self, message: str, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class IllConditionedMetricError(FinslerError):
    """The fundamental tensor is numerically singular (cond > threshold)."""

    def __init__(self, message: str, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class InvalidWarpingError(FinslerError):
    """A warping function failed to be strictly positive on samples."""


class FormulaViolationError(FinslerError):
    """A closed-form block formula disagreed with direct computation."""

    def __init__(self, message: str, block=None, worst_entry=None,
                 deviation=None, tolerance=None):
        super().__init__(message)
        self.block = block
        self.worst_entry = worst_entry
        self.deviation = deviation
        self.tolerance = tolerance


class InconsistentVerdictError(FinslerError):
    """Classification verdicts violated a logical implication.

    Signals tolerance misconfiguration, not a property of the metric.
    """


class HypothesisViolationError(FinslerError):
    """Input does not satisfy the premise of the requested check."""


class InvalidCaseError(FinslerError):
    """A reconstruction case is structurally inadmissible (e.g. the
    prescribed gradient field is not integrable)."""


class NotAFinslerMetricError(FinslerError):
    """A reconstructed quadratic form is not positive definite."""

    def __init__(self, message: str, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
