"""Exception hierarchy with machine-readable error codes.

Every error carries a short ``code`` string that the CLI harness writes
into reports, so failures stay identifiable after serialization.
"""

from __future__ import annotations


class CircleVarError(Exception):
    code = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context


class InvalidArgumentError(CircleVarError):
    code = "invalid-argument"


class InvalidDataError(CircleVarError):
    code = "invalid-data"


class InvalidStructureError(CircleVarError):
    code = "invalid-structure"


class UnsupportedIntegratorError(CircleVarError):
    code = "unsupported-integrator"


class NumericFailureError(CircleVarError):
    code = "numeric-failure"


class InvalidHomeomorphismError(CircleVarError):
    code = "invalid-homeomorphism"


class InvalidSchemeError(CircleVarError):
    code = "invalid-scheme"


class InvalidWeightsError(CircleVarError):
    code = "invalid-weights"


class ConstructionFailureError(CircleVarError):
    code = "construction-failure"


class InvalidBranchingError(CircleVarError):
    code = "invalid-branching"


class DepthLimitError(CircleVarError):
    code = "depth-limit"


class InsufficientDepthError(CircleVarError):
    code = "insufficient-depth"


class SelectionFailureError(CircleVarError):
    code = "selection-failure"


class ExtractionRefusedError(CircleVarError):
    code = "extraction-refused"


class UnboundedVariationError(CircleVarError):
    code = "unbounded-variation-suspected"


class SolverFailureError(CircleVarError):
    code = "solver-failure"


class InvalidBoundaryError(CircleVarError):
    code = "invalid-boundary"


class IntegrityError(CircleVarError):
    code = "integrity-error"
