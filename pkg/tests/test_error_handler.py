import pytest

from nullgeo.error_handler import (
    EXIT_NUMERICAL,
    EXIT_SCHEMA,
    EXIT_SPEC_INVARIANT,
    ConformalFactorError,
    ConvergenceError,
    ErrorHandler,
    ErrorType,
    ExpressionSyntaxError,
    NotLightlikeError,
    SpecSchemaError,
    safe_execute,
)


@pytest.mark.parametrize("error, code", [
    (SpecSchemaError("bad"), EXIT_SCHEMA),
    (ExpressionSyntaxError("Unexpected end of input", "x1 +", 4), EXIT_SCHEMA),
    (NotLightlikeError("rank 3"), EXIT_SPEC_INVARIANT),
    (ConformalFactorError("xi(f) != 0"), EXIT_SPEC_INVARIANT),
    (ConvergenceError("stuck"), EXIT_NUMERICAL),
    (ZeroDivisionError("boom"), EXIT_NUMERICAL),
])
def test_exit_codes(error, code):
    assert ErrorHandler().exit_code_for(error) == code


def test_expression_syntax_message_carries_offset():
    error = ExpressionSyntaxError("Unexpected end of input", "x1 +", 4)
    assert str(error) == "Unexpected end of input at offset 4 in 'x1 +'"
    assert error.to_dict()["context"] == {"text": "x1 +", "offset": 4}


def test_handle_error_adds_hints():
    result = ErrorHandler().handle_error(ConformalFactorError("xi(f) != 0", {"max_xi_f": 0.5}))
    assert result["error_type"] == ErrorType.CONFORMAL_FACTOR.value
    assert result["exit_code"] == EXIT_SPEC_INVARIANT
    assert result["context"] == {"max_xi_f": 0.5}
    assert any("xi(f) = 0" in hint for hint in result["hints"])


def test_handle_foreign_error():
    result = ErrorHandler().handle_error(RuntimeError("unexpected"))
    assert result["error_type"] == "unknown_error"
    assert result["exit_code"] == EXIT_NUMERICAL
    assert result["hints"] == []


def test_safe_execute():
    ok, value, error = safe_execute(lambda a, b: a + b, 2, b=3)
    assert (ok, value, error) == (True, 5, None)
    ok, value, error = safe_execute(lambda: 1 / 0)
    assert not ok and value is None
    assert isinstance(error, ZeroDivisionError)
