import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fraclap import FracLapWarning, SineCoefficients
from fraclap.quadrature import (
    GridFunction,
    check_resolution,
    evaluate,
    gauss_legendre_composite,
    integrate,
    integrate_inner,
    l2_norm,
    project_to_sine,
    project_values,
    sine_basis_at,
    synthesize,
)

S = math.sqrt(2 / math.pi)


@pytest.fixture(scope="module")
def rule():
    return gauss_legendre_composite()


def test_rule_invariants(rule):
    assert abs(rule.weights.sum() - math.pi) <= 1e-12
    assert rule.nodes[0] > 0 and rule.nodes[-1] < math.pi
    assert np.all(np.diff(rule.nodes) > 0)
    assert rule.size == rule.panels * rule.order


@pytest.mark.parametrize("panels, order", [(0, 12), (4, 1), (-3, 5)])
def test_rule_rejects_bad_sizes(panels, order):
    with pytest.raises(ValueError):
        gauss_legendre_composite(panels, order)


def test_rule_is_cached_and_immutable(rule):
    assert gauss_legendre_composite() is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


def test_sin_squared(rule):
    g = GridFunction(np.sin(rule.nodes) ** 2, rule)
    assert integrate(g)[0] == pytest.approx(math.pi / 2, abs=1e-13)


@pytest.mark.xfail(
    strict=True,
    reason="equal panels converge like h^(2/3) on t^(-1/3); 64x12 leaves about 1.9e-3, not 1e-6",
)
def test_singular_endpoint_to_1e_6_at_64x12():
    rule = gauss_legendre_composite(64, 12)
    g = GridFunction(rule.nodes ** (-1 / 3), rule)
    assert abs(integrate(g)[0] - 1.5 * math.pi ** (2 / 3)) <= 1e-6


def test_singular_endpoint_error_at_64x12():
    rule = gauss_legendre_composite(64, 12)
    err = abs(rule.weights @ rule.nodes ** (-1 / 3) - 1.5 * math.pi ** (2 / 3))
    assert 1e-3 < err < 2e-3


def test_singular_endpoint_error_decreases_as_panels_double():
    exact = 1.5 * math.pi ** (2 / 3)
    errs = []
    for panels in (4, 8, 16, 32, 64, 128):
        rule = gauss_legendre_composite(panels, 12)
        errs.append(abs(rule.weights @ rule.nodes ** (-1 / 3) - exact))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # endpoint panel dominates: error ~ h^(2/3), ratio 2^(2/3)
    np.testing.assert_allclose(ratios, 2 ** (2 / 3), rtol=1e-6)


def test_project_known_modes(rule):
    vals = 2 * S * np.sin(rule.nodes) + 0.5 * S * np.sin(4 * rule.nodes)
    b = project_to_sine(GridFunction(vals, rule), 6).a[:, 0]
    np.testing.assert_allclose(b, [2, 0, 0, 0.5, 0, 0], atol=1e-12)


def test_project_constant(rule):
    b = project_to_sine(GridFunction(np.ones(rule.size), rule), 3).a[:, 0]
    np.testing.assert_allclose(b, [2 * S, 0, 2 * S / 3], atol=1e-10)


def test_inner_product_t_sin(rule):
    t = GridFunction(rule.nodes, rule)
    s = GridFunction(np.sin(rule.nodes), rule)
    assert integrate_inner(t, s) == pytest.approx(math.pi, abs=1e-10)


def test_inner_rejects_other_rule(rule):
    other = gauss_legendre_composite(8, 4)
    with pytest.raises(ValueError):
        integrate_inner(GridFunction(np.ones(rule.size), rule), GridFunction(np.ones(other.size), other))


def test_grid_function_validation(rule):
    with pytest.raises(ValueError):
        GridFunction(np.ones(rule.size - 1), rule)
    with pytest.raises(ValueError):
        GridFunction(np.full(rule.size, np.inf), rule)


@given(arrays(np.float64, (200, 2), elements=st.floats(-10, 10)))
def test_round_trip_band_limited(a):
    rule = gauss_legendre_composite()
    x = SineCoefficients(a)
    back = project_to_sine(evaluate(x, rule), x.J)
    assert np.max(np.abs(back.a - x.a)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@given(
    arrays(np.float64, (8, 2), elements=st.floats(-5, 5)),
    arrays(np.float64, (8, 2), elements=st.floats(-5, 5)),
    arrays(np.float64, (8, 2), elements=st.floats(-5, 5)),
    st.floats(-3, 3),
)
def test_inner_symmetric_and_bilinear(a, b, c, k):
    rule = gauss_legendre_composite(8, 6)
    f, g, h = (evaluate(SineCoefficients(v), rule) for v in (a, b, c))
    assert integrate_inner(f, g) == integrate_inner(g, f)
    combo = GridFunction(f.values + k * h.values, rule)
    lhs = integrate_inner(combo, g)
    rhs = integrate_inner(f, g) + k * integrate_inner(h, g)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-11)


def test_l2_norm_matches_parseval(rule):
    x = SineCoefficients([[3.0], [0.0], [-4.0]])
    assert l2_norm(evaluate(x, rule)) == pytest.approx(5.0, rel=1e-13)


def test_synthesis_vanishes_at_ends():
    x = SineCoefficients(np.arange(1.0, 9.0))
    vals = synthesize(x, np.array([0.0, math.pi]))
    assert np.all(np.abs(vals) <= 1e-13)


def test_sine_basis_at_orthonormal_values():
    np.testing.assert_allclose(sine_basis_at([math.pi / 2], 2)[:, 0], [S, 0], atol=1e-16)


def test_resolution_warning():
    rule = gauss_legendre_composite(4, 4)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert check_resolution(rule, 4)
        assert not check_resolution(rule, 5)
        project_to_sine(GridFunction(np.ones(rule.size), rule), 10)
    assert len(caught) == 2 and all(issubclass(w.category, FracLapWarning) for w in caught)


def test_project_values_matrix_shape(rule):
    vals = np.ones((rule.size, 3))
    assert project_values(vals, rule, 7).shape == (7, 3)


def test_normalized_sin_squared_small_rule():
    rule = gauss_legendre_composite(8, 8)
    assert rule.weights @ (2 / math.pi * np.sin(rule.nodes) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_project_single_mode(rule):
    b = project_to_sine(GridFunction(S * np.sin(3 * rule.nodes), rule), 8).a[:, 0]
    np.testing.assert_allclose(b, np.eye(8)[2], atol=1e-12)
