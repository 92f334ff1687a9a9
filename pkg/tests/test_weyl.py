import numpy as np
import pytest

from nullgeo.error_handler import ConformalFactorError
from nullgeo.exprcalc import parse
from nullgeo.geometry_spec import load_spec
from nullgeo.tensor_fields import ExpressionField, residual
from nullgeo.weyl import ConformalClassMember, WeylData, exterior_derivative, trace_with, wedge_forms


POINT = np.array([0.1, 0.2, -0.15])


@pytest.fixture(scope="module")
def conformal_spec():
    return load_spec("null_hyperplane_conformal")


@pytest.fixture(scope="module")
def conformal_weyl(conformal_spec):
    member = ConformalClassMember(conformal_spec.build_hypersurface(), conformal_spec.f)
    return WeylData(member, conformal_spec.theta0_field())


def test_exterior_derivative_convention():
    jac = np.array([[1.0, 2.0, 0.0], [5.0, 0.0, 1.0], [0.0, -1.0, 3.0]])
    d = exterior_derivative(jac)
    assert np.allclose(d, -d.T)
    assert d[0, 1] == pytest.approx(0.5 * (2.0 - 5.0))


def test_wedge_forms_is_antisymmetric():
    alpha = np.array([1.0, 0.0, 2.0])
    beta = np.array([0.0, 3.0, 1.0])
    w = wedge_forms(alpha, beta)
    assert np.allclose(w, -w.T)
    assert w[0, 1] == pytest.approx(3.0)
    assert np.allclose(wedge_forms(alpha, alpha), 0.0)


def test_member_metric_is_conformal(conformal_spec):
    hyperplane = conformal_spec.build_hypersurface()
    member = ConformalClassMember(hyperplane, conformal_spec.f)
    obj = member.objects(POINT)
    weight = np.exp(-2.0 * conformal_spec.f.evaluate(POINT))
    assert np.allclose(obj.metric, weight * hyperplane.objects(POINT).metric)
    assert member.radical_derivative(POINT) == 0.0
    member.check_conformal_factor([POINT])


def test_member_connection_is_metric(conformal_weyl):
    obj = conformal_weyl.member.objects(POINT)
    gamma = obj.gamma
    nabla_g = (obj.metric_derivative
               - np.einsum('eab,ec->abc', gamma, obj.metric)
               - np.einsum('eac,be->abc', gamma, obj.metric))
    assert np.max(np.abs(nabla_g)) < 1e-12


def test_radical_dependent_factor_rejected(null_hyperplane):
    member = ConformalClassMember(null_hyperplane, parse("x0", 3))
    with pytest.raises(ConformalFactorError):
        member.check_conformal_factor([POINT])


def test_weyl_metricity(conformal_weyl):
    assert residual(*conformal_weyl.metric_defect(POINT)) < 1e-10


def test_rescaling_shifts_weyl_form_by_gradient(conformal_weyl):
    f_prime = parse("0.2*x1*x2", 3)
    rescaled = conformal_weyl.rescaled(f_prime)
    assert np.allclose(rescaled.theta(POINT) - conformal_weyl.theta(POINT), f_prime.gradient(POINT))
    assert np.allclose(rescaled.member.objects(POINT).metric,
                       np.exp(-2.0 * f_prime.evaluate(POINT)) * conformal_weyl.member.objects(POINT).metric)


def test_ricci_is_conformally_invariant(conformal_weyl):
    rescaled = conformal_weyl.rescaled(parse("0.2*x1*x2", 3))
    assert residual(rescaled.ricci(POINT), conformal_weyl.ricci(POINT)) < 1e-4


def test_trivial_weyl_structure_is_flat(null_hyperplane):
    weyl = WeylData(ConformalClassMember(null_hyperplane), ExpressionField.from_text(["0", "0", "0"], 3))
    assert np.allclose(weyl.connection(POINT), 0.0)
    assert np.allclose(weyl.curvature(POINT), 0.0)
    assert weyl.scalar(POINT) == pytest.approx(0.0)


def test_two_dimensional_screen_is_einstein_weyl(conformal_spec):
    base = ConformalClassMember(conformal_spec.build_hypersurface(), None, "g0")
    weyl = WeylData(base, conformal_spec.theta0_field())
    _, fit_residual = weyl.einstein_fit(POINT)
    assert fit_residual < 1e-4


def test_contracted_scalar_form_is_the_trace_of_the_ricci_form(conformal_weyl):
    kit = conformal_weyl.member.objects(POINT).kit
    traced = trace_with(kit, conformal_weyl.ricci_formula(POINT))
    contracted = conformal_weyl.scalar_formula(POINT, contracted=True)
    assert contracted == pytest.approx(traced, abs=1e-5)
    assert contracted == pytest.approx(conformal_weyl.scalar(POINT), abs=1e-3)


def test_printed_scalar_form_differs_on_a_horizontal_factor(conformal_weyl):
    printed = conformal_weyl.scalar_formula(POINT)
    contracted = conformal_weyl.scalar_formula(POINT, contracted=True)
    assert abs(printed - contracted) > 1e-3


def test_printed_scalar_form_agrees_when_the_factor_is_trivial(null_hyperplane):
    weyl = WeylData(ConformalClassMember(null_hyperplane),
                    ExpressionField.from_text(["0", "0.2 + 0.1*x1", "0.3*x2"], 3))
    assert weyl.scalar_formula(POINT) == pytest.approx(weyl.scalar_formula(POINT, contracted=True), abs=1e-12)
