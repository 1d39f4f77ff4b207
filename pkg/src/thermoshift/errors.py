"""Exception hierarchy.

Everything the CLI maps to exit code 2 derives from :class:`ValidationError`;
numerical non-convergence derives from :class:`ConvergenceError` (exit 3).
"""


class ThermoshiftError(Exception):
    """Base class for all package errors."""

    code = "error"

    def __init__(self, message="", **detail):
        super().__init__(message)
        self.detail = detail

    def as_dict(self):
        out = {"error": self.code, "detail": str(self)}
        out.update({k: v for k, v in self.detail.items() if _jsonable(v)})
        return out


def _jsonable(v):
    return isinstance(v, (int, float, str, bool, list, tuple, type(None)))


class ValidationError(ThermoshiftError):
    code = "validation"


class NonBinaryEntry(ValidationError):
    code = "NonBinaryEntry"


class ZeroRow(ValidationError):
    code = "ZeroRow"


class ZeroColumn(ValidationError):
    code = "ZeroColumn"


class DepthCapExceeded(ValidationError):
    code = "DepthCapExceeded"


class InadmissibleWord(ValidationError):
    code = "InadmissibleWord"


class DomainError(ValidationError):
    code = "DomainError"


class NotNormalized(ValidationError):
    code = "NotNormalized"


class OutOfRange(ValidationError):
    code = "OutOfRange"


class NotIrreducible(ValidationError):
    code = "NotIrreducible"


class ZeroEdgeWeight(ValidationError):
    code = "ZeroEdgeWeight"


class NoAdmissibleSupport(ValidationError):
    code = "NoAdmissibleSupport"


class NoEssentialStates(ValidationError):
    code = "NoEssentialStates"


class NonPeriodicWeights(ValidationError):
    code = "NonPeriodicWeights"


class GridTooCoarse(ValidationError):
    code = "GridTooCoarse"


class InvalidTree(ValidationError):
    code = "InvalidTree"


class ConvergenceError(ThermoshiftError):
    """Raised when an iteration hits its budget.

    ``result`` carries the best available answer so callers can still report
    an enclosure.
    """

    code = "MaxIterations"

    def __init__(self, message="", result=None, **detail):
        super().__init__(message, **detail)
        self.result = result


MaxIterations = ConvergenceError
