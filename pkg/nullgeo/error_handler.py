"""
Error Handler

Exception hierarchy for verification runs, exit-code mapping and
user-facing hints for each failure class.
"""

import logging
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple


logger = logging.getLogger(__name__)


class ErrorType(Enum):
    """Types of errors that can occur during a run"""
    SCHEMA_ERROR = "schema_error"
    EXPRESSION_SYNTAX = "expression_syntax"
    COORDINATE_RANGE = "coordinate_range"
    NOT_LIGHTLIKE = "not_lightlike"
    DEGENERATE_SCREEN = "degenerate_screen"
    NON_INTEGRABLE_SCREEN = "non_integrable_screen"
    CONFORMAL_FACTOR = "conformal_factor"
    AMBIENT_INVARIANT = "ambient_invariant"
    EVALUATION_DOMAIN = "evaluation_domain"
    SINGULAR_METRIC = "singular_metric"
    CONVERGENCE = "convergence"
    UNKNOWN_ERROR = "unknown_error"


EXIT_OK = 0
EXIT_IDENTITY_FAILURE = 1
EXIT_SCHEMA = 2
EXIT_SPEC_INVARIANT = 3
EXIT_NUMERICAL = 4


class NullGeoError(Exception):
    """Base class for all nullgeo errors"""
    exit_code = EXIT_NUMERICAL
    error_type = ErrorType.UNKNOWN_ERROR

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for reports and run logs"""
        return {
            "error_type": self.error_type.value,
            "message": self.message,
            "exit_code": self.exit_code,
            "context": self.context,
        }


class SpecSchemaError(NullGeoError):
    """GeometrySpec does not match the schema"""
    exit_code = EXIT_SCHEMA
    error_type = ErrorType.SCHEMA_ERROR


class ExpressionSyntaxError(SpecSchemaError):
    """Expression text does not conform to the grammar"""
    error_type = ErrorType.EXPRESSION_SYNTAX

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}",
                         {"text": text, "offset": offset})
        self.text = text
        self.offset = offset


class CoordinateRangeError(SpecSchemaError):
    """Expression references a coordinate beyond the chart dimension"""
    error_type = ErrorType.COORDINATE_RANGE


class SpecInvariantError(NullGeoError):
    """Spec parses but violates a geometric precondition"""
    exit_code = EXIT_SPEC_INVARIANT
    error_type = ErrorType.UNKNOWN_ERROR


class NotLightlikeError(SpecInvariantError):
    """Induced metric does not have a one-dimensional kernel"""
    error_type = ErrorType.NOT_LIGHTLIKE


class DegenerateScreenError(SpecInvariantError):
    """Screen fields do not complement the radical or have a singular Gram matrix"""
    error_type = ErrorType.DEGENERATE_SCREEN


class NonIntegrableScreenError(SpecInvariantError):
    """Screen distribution fails the integrability check"""
    error_type = ErrorType.NON_INTEGRABLE_SCREEN


class ConformalFactorError(SpecInvariantError):
    """Conformal factor is not constant along the radical"""
    error_type = ErrorType.CONFORMAL_FACTOR


class AmbientInvariantError(SpecInvariantError):
    """Ambient metric or complex structure violates its declared invariants"""
    error_type = ErrorType.AMBIENT_INVARIANT


class NumericalError(NullGeoError):
    """Internal numerical failure"""
    exit_code = EXIT_NUMERICAL
    error_type = ErrorType.UNKNOWN_ERROR


class EvaluationDomainError(NumericalError):
    """Expression evaluated to a non-finite value"""
    error_type = ErrorType.EVALUATION_DOMAIN


class SingularMetricError(NumericalError):
    """Metric or frame system is singular at a point"""
    error_type = ErrorType.SINGULAR_METRIC


class ConvergenceError(NumericalError):
    """Iterative construction did not converge"""
    error_type = ErrorType.CONVERGENCE


class ErrorHandler:
    """
    Maps failures to exit codes and hints

    Features:
    - Error classification by exception class
    - Hints for fixing the GeometrySpec
    """

    HINTS: Dict[ErrorType, List[str]] = {
        ErrorType.SCHEMA_ERROR: [
            "Check the spec against the GeometrySpec schema (see fixtures/ for examples)",
            "chart_dim must equal ambient.dim - 1 and screen must hold chart_dim - 1 fields",
        ],
        ErrorType.EXPRESSION_SYNTAX: [
            "Expressions use x0..xk, + - * / ^ (integer exponents), sin cos exp log sqrt",
        ],
        ErrorType.COORDINATE_RANGE: [
            "Coordinate symbols must stay below the dimension of their chart",
        ],
        ErrorType.NOT_LIGHTLIKE: [
            "The pulled-back metric must have exactly one zero singular value",
            "Check the embedding and that the ambient signature is indefinite",
        ],
        ErrorType.DEGENERATE_SCREEN: [
            "Screen fields must be independent and complementary to the radical field",
        ],
        ErrorType.NON_INTEGRABLE_SCREEN: [
            "Weyl screen structures need an integrable screen: eta([Wi, Wj]) must vanish",
        ],
        ErrorType.CONFORMAL_FACTOR: [
            "The conformal factor f must satisfy xi(f) = 0",
        ],
        ErrorType.AMBIENT_INVARIANT: [
            "Check metric symmetry, declared index and the complex structure block",
        ],
        ErrorType.EVALUATION_DOMAIN: [
            "Shrink grid ranges so log/sqrt/division stay inside their domains",
        ],
        ErrorType.SINGULAR_METRIC: [
            "The metric or a frame system is singular somewhere on the grid",
        ],
        ErrorType.CONVERGENCE: [
            "The complex-structure screen iteration did not stabilise; check the provisional screen",
        ],
    }

    def exit_code_for(self, error: BaseException) -> int:
        """
        Get exit code for an exception

        Args:
            error: Raised exception

        Returns:
            Process exit code
        """
        if isinstance(error, NullGeoError):
            return error.exit_code
        return EXIT_NUMERICAL

    def handle_error(self, error: BaseException) -> Dict[str, Any]:
        """
        Classify error and attach hints

        Args:
            error: Raised exception

        Returns:
            Dict with error type, message, exit code and hints
        """
        if isinstance(error, NullGeoError):
            result = error.to_dict()
        else:
            result = {
                "error_type": ErrorType.UNKNOWN_ERROR.value,
                "message": str(error),
                "exit_code": EXIT_NUMERICAL,
                "context": {},
            }
        error_type = ErrorType(result["error_type"])
        result["hints"] = list(self.HINTS.get(error_type, []))
        logger.error(f"Handling error: {error_type.value}: {result['message']}")
        return result


def safe_execute(func: Callable, *args, **kwargs) -> Tuple[bool, Any, Optional[BaseException]]:
    """
    Safely execute function with error handling

    Args:
        func: Function to execute
        *args: Positional arguments
        **kwargs: Keyword arguments

    Returns:
        Tuple of (success, result, exception)
    """
    try:
        result = func(*args, **kwargs)
        return (True, result, None)
    except Exception as e:
        name = getattr(func, '__name__', repr(func))
        logger.error(f"Error executing {name}: {e}")
        return (False, None, e)
