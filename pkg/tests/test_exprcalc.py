import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullgeo.error_handler import CoordinateRangeError, EvaluationDomainError, ExpressionSyntaxError
from nullgeo.exprcalc import (
    apply_function,
    constant,
    coordinate,
    derivative_oracle_residual,
    fd_partial,
    fd_second_partial,
    parse,
)


def test_precedence_and_unary_minus():
    f = parse("-x0^2 + 3*x1/2", 2)
    assert f.evaluate([2.0, 4.0]) == pytest.approx(-4.0 + 6.0)


def test_functions_evaluate():
    f = parse("sin(x0) + cos(x1) + exp(x2) + log(x0 + 1) + sqrt(x1^2 + 1)", 3)
    p = [0.3, -0.7, 0.2]
    expected = (math.sin(0.3) + math.cos(-0.7) + math.exp(0.2)
                + math.log(1.3) + math.sqrt(0.49 + 1.0))
    assert f.evaluate(p) == pytest.approx(expected)


def test_batch_evaluation_matches_pointwise():
    f = parse("x0*x1 - sin(x2)", 3)
    batch = np.array([[0.1, 0.2, 0.3], [1.0, -1.0, 0.5], [2.0, 0.0, -0.4]])
    values = f.evaluate(batch)
    assert values.shape == (3,)
    for k in range(3):
        assert values[k] == pytest.approx(f.evaluate(batch[:, k]))


def test_syntax_error_reports_byte_offset():
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse("x0+@", 3)
    assert excinfo.value.offset == 3

    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse("x1 +", 3)
    assert excinfo.value.offset == 4


def test_non_integer_exponent_rejected():
    with pytest.raises(ExpressionSyntaxError):
        parse("x0^1.5", 1)
    with pytest.raises(ExpressionSyntaxError):
        parse("x0^x0", 1)


def test_coordinate_out_of_range():
    with pytest.raises(CoordinateRangeError):
        parse("x3", 3)
    with pytest.raises(CoordinateRangeError):
        coordinate(2, 2)


def test_domain_error_on_log_of_negative():
    f = parse("log(x0)", 1)
    with pytest.raises(EvaluationDomainError):
        f.evaluate([-1.0])


def test_exact_partials_of_polynomial():
    f = parse("x0^3*x1 + 2*x1^2", 2)
    p = [1.5, -2.0]
    assert f.exact_partial(0).evaluate(p) == pytest.approx(3 * 1.5 ** 2 * -2.0)
    assert f.exact_partial(1).evaluate(p) == pytest.approx(1.5 ** 3 + 4 * -2.0)
    assert f.hessian(p)[0, 1] == pytest.approx(3 * 1.5 ** 2)


def test_constant_folding():
    assert parse("2*3 - 6", 2).is_zero()
    assert parse("sin(0)", 2).is_zero()
    assert parse("0*x1 + 4", 2).is_constant()
    assert constant(0.0, 3).is_zero()
    assert not parse("x0", 1).is_constant()


def test_zero_factor_keeps_domain_errors():
    assert parse("0*sin(x0) + 0*x0^2", 1).is_zero()
    guarded = parse("0*log(x0)", 1)
    assert not guarded.is_constant()
    assert guarded.evaluate([2.0]) == 0.0
    with pytest.raises(EvaluationDomainError):
        guarded.evaluate([-1.0])
    with pytest.raises(EvaluationDomainError):
        parse("0/x0", 1).evaluate([0.0])


def test_partials_of_partial_domain_functions_still_fold():
    f = parse("log(x0) + x1", 2)
    assert f.exact_partial(1).evaluate([-1.0, 0.0]) == pytest.approx(1.0)
    assert parse("sqrt(x0)", 2).exact_partial(1).is_zero()


def test_compose_pulls_back():
    f = parse("x0^2 + x1", 2)
    u = [parse("x0 + 1", 1), parse("2*x0", 1)]
    g = f.compose(u)
    assert g.dim == 1
    assert g.evaluate([0.5]) == pytest.approx(1.5 ** 2 + 1.0)


def test_field_arithmetic():
    x0 = coordinate(0, 2)
    x1 = coordinate(1, 2)
    f = apply_function('exp', x0 * 2.0) - x1 / 4.0
    assert f.evaluate([0.5, 2.0]) == pytest.approx(math.e - 0.5)
    assert (-f).evaluate([0.5, 2.0]) == pytest.approx(0.5 - math.e)


def test_fd_second_partial_richardson():
    f = parse("sin(x0)*exp(x1)", 2)
    p = [0.4, -0.3]
    exact = f.exact_partial(0).exact_partial(1).evaluate(p)
    assert fd_second_partial(f, 0, 1, p) == pytest.approx(exact, abs=1e-7)


# -- property based ---------------------------------------------------------------------

_leaves = st.one_of(
    st.sampled_from(["x0", "x1", "x2"]),
    st.integers(min_value=0, max_value=9).map(str),
    st.sampled_from(["0.5", "1.25"]),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda c: f"(-{c})"),
        st.tuples(children, st.integers(min_value=0, max_value=3)).map(lambda t: f"({t[0]})^{t[1]}"),
    )


expressions = st.recursive(_leaves, _extend, max_leaves=6)
points = st.lists(st.floats(min_value=-0.8, max_value=0.8), min_size=3, max_size=3)


@settings(max_examples=60, deadline=None)
@given(expressions, points)
def test_printed_text_parses_to_the_same_function(text, point):
    f = parse(text, 3)
    try:
        value = f.evaluate(point)
    except EvaluationDomainError:
        return
    reparsed = parse(f.to_text(), 3)
    assert reparsed.evaluate(point) == pytest.approx(value, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(expressions, points)
def test_exact_partials_agree_with_central_differences(text, point):
    f = parse(text, 3)
    h = 1e-5
    for i in range(3):
        third = f.exact_partial(i).exact_partial(i).exact_partial(i)
        try:
            exact = f.exact_partial(i).evaluate(point)
            bound = h * h * (1.0 + abs(third.evaluate(point))) + 1e-9 * (1.0 + abs(f.evaluate(point)))
            approx = fd_partial(f, i, point, h)
        except EvaluationDomainError:
            return
        assert abs(exact - approx) <= bound


def test_derivative_oracle_residual_is_small_for_smooth_field():
    f = parse("exp(x0)*sin(x1) + x2^3", 3)
    assert derivative_oracle_residual(f, [0.1, 0.2, 0.3]) <= 1e-8


def test_fd_partial_matches_exact_on_trig():
    f = parse("sin(x0)*cos(x1)", 2)
    p = [0.2, 0.9]
    assert fd_partial(f, 1, p) == pytest.approx(f.exact_partial(1).evaluate(p), abs=1e-9)
