import numpy as np
import pytest

from nullgeo.error_handler import DegenerateScreenError, NonIntegrableScreenError, NotLightlikeError
from nullgeo.geometry_spec import load_spec
from nullgeo.hypersurface import (
    Embedding,
    LightlikeHypersurface,
    check_lightlike,
    complete_screen,
    metric_rank,
    radical_generator,
    solve_full_pivot,
    transversal,
)
from nullgeo.tensor_fields import ExpressionField


def test_null_hyperplane_induced_objects(null_hyperplane):
    obj = null_hyperplane.objects([0.1, -0.2, 0.3])
    assert np.allclose(obj.metric, np.diag([0.0, 1.0, 1.0]))
    assert np.allclose(obj.transversal, [-0.5, 0.5, 0.0, 0.0])
    assert np.allclose(obj.eta, [1.0, 0.0, 0.0])
    assert np.allclose(obj.gamma, 0.0)
    assert np.allclose(obj.B, 0.0)
    assert np.allclose(obj.tau, 0.0)
    assert np.allclose(obj.projection @ obj.xi, 0.0)


def test_transversal_is_null_and_normalised(null_hyperplane):
    obj = null_hyperplane.objects([0.2, 0.2, -0.1])
    gbar = obj.ambient_metric
    n_bar = obj.transversal
    assert n_bar @ gbar @ n_bar == pytest.approx(0.0, abs=1e-12)
    assert n_bar @ gbar @ obj.xi_bar == pytest.approx(1.0)
    assert np.allclose(obj.screen_bar @ gbar @ n_bar, 0.0)


def test_gauss_weingarten_slices_vanish_on_hyperplane(null_hyperplane):
    X = np.array([0.3, 1.0, -2.0])
    Y = np.array([1.0, 0.5, 0.25])
    slices = null_hyperplane.gauss_weingarten([0.0, 0.1, 0.2], X, Y)
    assert slices["B"] == pytest.approx(0.0)
    assert slices["C"] == pytest.approx(0.0)
    assert np.allclose(slices["nabla"], 0.0)
    assert np.allclose(slices["A_N"], 0.0, atol=1e-9)


def test_hyperplane_is_totally_geodesic(null_hyperplane, sample_points):
    status = null_hyperplane.check_totally_geodesic(sample_points)
    assert status["totally_geodesic"] is True
    assert status["max_B"] == pytest.approx(0.0, abs=1e-12)


def test_light_cone_is_not_totally_geodesic():
    cone = load_spec("light_cone").build_hypersurface()
    points = [np.array([1.0, 0.5, 0.5]), np.array([0.7, 1.2, 0.9])]
    status = cone.check_totally_geodesic(points)
    assert status["totally_geodesic"] is False
    assert status["max_B"] > 1e-2


def test_light_cone_rotation_screen_is_integrable():
    cone = load_spec("light_cone").build_hypersurface()
    assert cone.screen_integrability_residual([1.0, 0.5, 0.5]) < 1e-9


def test_radical_generator_and_rank():
    g = np.diag([0.0, 2.0, 3.0])
    rank, singular_values = metric_rank(g)
    assert rank == 2
    assert len(singular_values) == 3
    assert np.allclose(radical_generator(g), [1.0, 0.0, 0.0])


def test_nondegenerate_metric_is_not_lightlike():
    with pytest.raises(NotLightlikeError, match="rank n\\+1"):
        check_lightlike(np.eye(3))


def test_spacelike_embedding_rejected(minkowski4):
    spacelike = LightlikeHypersurface(minkowski4, Embedding.from_text(["0", "x0", "x1", "x2"], 3))
    with pytest.raises(NotLightlikeError):
        spacelike.objects([0.1, 0.2, 0.3])


def test_kernel_radical_and_completed_screen(minkowski4):
    hyperplane = LightlikeHypersurface(minkowski4, Embedding.from_text(["x0", "x0", "x1", "x2"], 3))
    assert hyperplane.screen_completed
    obj = hyperplane.objects([0.1, 0.1, 0.1])
    assert np.allclose(obj.xi, [1.0, 0.0, 0.0])
    assert np.linalg.matrix_rank(obj.frame) == 3


def test_complete_screen_complements_xi():
    xi = np.array([0.6, 0.8, 0.0])
    screen = complete_screen(xi)
    assert screen.shape == (2, 3)
    assert np.linalg.matrix_rank(np.vstack([xi, screen])) == 3


def test_screen_containing_radical_is_degenerate(minkowski4):
    hyperplane = LightlikeHypersurface(
        minkowski4, Embedding.from_text(["x0", "x0", "x1", "x2"], 3),
        xi=ExpressionField.from_text(["1", "0", "0"], 3),
        screen=[ExpressionField.from_text(["1", "0", "0"], 3), ExpressionField.from_text(["0", "1", "0"], 3)],
    )
    with pytest.raises(DegenerateScreenError):
        hyperplane.objects([0.0, 0.0, 0.0])


def test_non_integrable_screen_detected(minkowski4):
    hyperplane = LightlikeHypersurface(
        minkowski4, Embedding.from_text(["x0", "x0", "x1", "x2"], 3),
        xi=ExpressionField.from_text(["1", "0", "0"], 3),
        screen=[ExpressionField.from_text(["0", "1", "0"], 3), ExpressionField.from_text(["x1", "0", "1"], 3)],
    )
    assert hyperplane.screen_integrability_residual([0.0, 0.2, 0.0]) == pytest.approx(1.0)
    with pytest.raises(NonIntegrableScreenError):
        hyperplane.check_screen_integrable([np.array([0.0, 0.2, 0.0])])


def test_full_pivot_solve_handles_zero_leading_entry():
    system = np.array([[0.0, 2.0, 1.0], [1e-3, 1.0, 0.0], [3.0, 0.0, 1.0]])
    rhs = np.array([1.0, 0.0, 0.0])
    assert np.allclose(solve_full_pivot(system, rhs), np.linalg.solve(system, rhs))


def test_transversal_with_badly_scaled_screen():
    gbar = np.diag([-1.0, 1.0, 1.0, 1.0])
    xi_bar = np.array([1.0, 1.0, 0.0, 0.0])
    screen_bar = np.array([[1e-4, 1e-4, 1e4, 0.0], [0.0, 0.0, 0.0, 1e-4]])
    N = transversal(xi_bar, screen_bar, gbar)
    assert N @ gbar @ xi_bar == pytest.approx(1.0, abs=1e-10)
    assert N @ gbar @ N == pytest.approx(0.0, abs=1e-10)
    assert np.allclose(screen_bar @ gbar @ N, 0.0, atol=1e-10)
