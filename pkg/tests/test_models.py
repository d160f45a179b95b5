import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavelab.models import DegenerateGammaError, ModelError, make_polynomial_model

coef = st.floats(-2.0, 2.0, allow_nan=False)
kinds = st.sampled_from(["constant", "inverse_rho"])
k0s = st.floats(0.1, 5.0)


def test_quadratic_constants():
    m = make_polynomial_model(0, 0, "constant", 1)
    assert m.Gamma == 3.0
    assert m.gamma == pytest.approx(1 / 3, abs=1e-16)


def test_degenerate_constants():
    m = make_polynomial_model(-0.5, 0, "constant", 1)
    assert m.is_degenerate
    assert m.Gamma_prime == -12.0
    assert m.gamma_prime == pytest.approx(1 / math.sqrt(12), rel=1e-15)
    with pytest.raises(DegenerateGammaError):
        m.gamma


def test_gamma_prime_needs_negative_Gamma_prime():
    m = make_polynomial_model(-0.5, 0.5)  # g'''(1) = 12
    with pytest.raises(ModelError):
        m.gamma_prime


def test_gamma_prime_off_branch():
    with pytest.raises(DegenerateGammaError):
        make_polynomial_model().gamma_prime


@pytest.mark.parametrize("k0", [0.0, -1.0, float("nan")])
def test_rejects_bad_k0(k0):
    with pytest.raises(ModelError):
        make_polynomial_model(0, 0, "constant", k0)


def test_rejects_unknown_kind():
    with pytest.raises(ModelError):
        make_polynomial_model(k_kind="cubic")


def test_eval_normalization():
    m = make_polynomial_model()
    v = m.eval(1.0)
    assert v.g == 0 and v.G == 0
    assert m.dg_offset(0.0) == 1.0
    v = m.eval(2.0)
    assert v.G == 0.5 and v.g == 1.0


def test_eval_cubic():
    assert make_polynomial_model(-0.5).eval(2.0).G == 0.0


@pytest.mark.parametrize("rho", [0.0, -0.3])
def test_eval_rejects_nonpositive(rho):
    with pytest.raises(ModelError):
        make_polynomial_model().eval(rho)


def test_inverse_rho_capillarity():
    m = make_polynomial_model(k_kind="inverse_rho", k0=2.0)
    v = m.eval(4.0)
    assert v.K == pytest.approx(0.5)
    assert v.dK == pytest.approx(-2.0 / 16)


def test_remainder_examples():
    assert make_polynomial_model().taylor_remainders(0.1).l == 0
    r = make_polynomial_model(-0.5).taylor_remainders(np.array([-0.3, 0.0, 0.7]))
    assert np.all(r.l == -0.5)
    r = make_polynomial_model(0.2, 0.1).taylor_remainders(np.array([-0.4, 0.4]))
    assert np.all(r.j == 0) and np.all(r.h3 == 0)


@settings(max_examples=60, deadline=None)
@given(coef, coef, kinds, k0s)
def test_gamma_relation(a3, a4, kind, k0):
    m = make_polynomial_model(a3, a4, kind, k0)
    assert m.Gamma == 3 + 6 * a3
    if not m.is_degenerate:
        assert abs(m.gamma * m.Gamma - 1) < 1e-15


@settings(max_examples=40, deadline=None)
@given(coef, coef, kinds, k0s)
def test_remainder_consistency(a3, a4, kind, k0):
    m = make_polynomial_model(a3, a4, kind, k0)
    x = np.random.default_rng(0).uniform(-0.5, 0.5, 100)
    r = m.taylor_remainders(x)
    G_direct = np.array([m.eval(1 + xi).G for xi in x])
    # identities are exact; only roundoff separates the two sides
    assert np.max(np.abs(G_direct - (x**2 / 2 + x**3 * r.l))) <= 1e-15 * (1 + np.max(np.abs(G_direct)))
    g_direct = np.array([m.eval(1 + xi).g for xi in x])
    assert np.allclose(g_direct, x + m.g2 * x**2 / 2 + x**3 * r.l1, rtol=1e-14, atol=1e-15)
    K_direct = np.array([m.eval(1 + xi).K for xi in x])
    assert np.allclose(K_direct, m.K1 + x * r.j, rtol=1e-14, atol=0)
    lhs = m.K1 * (1 / K_direct - 1 / m.K1)
    assert np.allclose(lhs, r.h3 * x, rtol=1e-12, atol=1e-15)
    l4 = m.quartic_remainder(x)
    assert np.allclose(G_direct, x**2 / 2 + m.g2 * x**3 / 6 + x**4 * l4, rtol=1e-14, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(coef, coef, st.floats(-0.9, 2.0))
def test_offset_derivatives_match_finite_differences(a3, a4, x):
    m = make_polynomial_model(a3, a4, "inverse_rho", 1.3)
    h = 1e-6
    fd = (m.G_offset(x + h) - m.G_offset(x - h)) / (2 * h)
    assert fd == pytest.approx(float(m.g_offset(x)), rel=1e-7, abs=1e-7)
    fd = (m.K_offset(x + h) - m.K_offset(x - h)) / (2 * h)
    assert fd == pytest.approx(float(m.dK_offset(x)), abs=1e-6)
    assert float(m.g_nl_offset(x)) == pytest.approx(float(m.g_offset(x)) - x, rel=1e-13, abs=1e-14)
