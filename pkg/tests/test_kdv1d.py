import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from wavelab import make_polynomial_model
from wavelab.kdv1d import (NotTransonicError, WaveParams1D, convergence_report, dF_offset,
                           find_rho_m, find_rho_m_gamma0, first_integral, integrate_profile,
                           phase_portrait, reference_soliton, rescale_to_r, sup_errors)
from wavelab.models import DegenerateGammaError

P = WaveParams1D


def test_params():
    p = P(0.6)
    assert p.c == pytest.approx(0.8)
    assert p.eps**2 + p.c**2 == pytest.approx(1.0)
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            P(bad)


def test_first_integral_vanishes_at_one():
    for m in (make_polynomial_model(), make_polynomial_model(0.4, -0.2, "inverse_rho", 2)):
        assert first_integral(m, P(0.3), 1.0) == 0.0


def test_first_integral_quadratic_factorization(quadratic):
    # for quadratic G, F = (rho - 1)**2 (1 - c**2 / rho) / 2
    p = P(0.3)
    rho = np.linspace(0.2, 3.0, 57)
    expected = (rho - 1) ** 2 * (1 - p.c2 / rho) / 2
    assert np.allclose(first_integral(quadratic, p, rho), expected, rtol=1e-13, atol=1e-17)
    assert abs(first_integral(quadratic, p, p.c2)) < 1e-17
    inside = np.linspace(p.c2, 1.0, 20)[1:-1]
    assert np.all(first_integral(quadratic, p, inside) > 0)


def test_first_integral_rejects_nonpositive(quadratic):
    with pytest.raises(ValueError):
        first_integral(quadratic, P(0.1), 0.0)


def test_rho_m_quadratic_exact(quadratic):
    rho_m = find_rho_m(quadratic, P(0.1))
    assert abs(rho_m - 0.99) <= 1e-13
    gamma, eps = 1 / 3, 0.1
    assert 1 - (3 * gamma * eps**2 + gamma * eps**3) <= rho_m <= 1 - (3 * gamma * eps**2 - gamma * eps**3)


@pytest.mark.parametrize("model_args", [(0.4, 0.0), (0.2, 0.3), (-1.0, 0.0), (-0.8, 0.5)])
def test_rho_m_general_models(model_args):
    m = make_polynomial_model(*model_args)
    # the two-sided bound is asymptotic; for these models it holds from eps = 0.1 down
    for eps in (0.1, 0.05, 0.02, 0.01):
        rho_m = find_rho_m(m, P(eps))
        g = m.gamma
        lo, hi = sorted((1 - (3 * g * eps**2 + abs(g) * eps**3), 1 - (3 * g * eps**2 - abs(g) * eps**3)))
        assert lo <= rho_m <= hi
        assert abs(first_integral(m, P(eps), rho_m)) < 1e-15
        # sign property for the accepted turning point
        assert g * dF_offset(m, P(eps), rho_m - 1) > 0


def test_rho_m_bracket_quadratic_sweep(quadratic):
    for eps in np.linspace(0.01, 0.3, 30):
        rho_m = find_rho_m(quadratic, P(eps))
        g = 1 / 3
        assert 1 - (3 * g * eps**2 + g * eps**3) <= rho_m <= 1 - (3 * g * eps**2 - g * eps**3)
        assert abs(rho_m - (1 - eps**2)) <= 1e-12


def test_rho_m_ratio_tends_to_one():
    m = make_polynomial_model(0.25, 0.1)
    ratios = [(1 - find_rho_m(m, P(e))) / (3 * m.gamma * e**2) for e in (0.2, 0.1, 0.05, 0.025)]
    gaps = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 0.02


def test_rho_m_not_transonic():
    # g''(1) < -3 makes gamma < 0: the root sits above 1; a huge eps still fails
    m = make_polynomial_model(0.0, 0.0)
    with pytest.raises(NotTransonicError):
        find_rho_m(m, P(0.999999))


def test_gamma0_roots_exact(degenerate):
    # H(x) = (eps**2 - x**2) / (2 (1 + x)) for this model: roots at x = +- eps
    eps = 0.1
    p = P(eps)
    plus = find_rho_m_gamma0(degenerate, p, +1)
    minus = find_rho_m_gamma0(degenerate, p, -1)
    assert plus == pytest.approx(1 + eps, abs=1e-13)
    assert minus == pytest.approx(1 - eps, abs=1e-13)
    # leading-order oracle 1 +- sqrt(12) gamma' eps
    lead = math.sqrt(12) * degenerate.gamma_prime * eps
    assert plus - 1 == pytest.approx(lead, rel=0.05)
    # independent bracket on F itself
    direct = brentq(lambda r: first_integral(degenerate, p, r), 1 + 0.5 * eps, 1 + 1.5 * eps, xtol=1e-15)
    assert plus == pytest.approx(direct, abs=1e-13)


def test_gamma0_guard(quadratic):
    with pytest.raises(DegenerateGammaError):
        find_rho_m_gamma0(quadratic, P(0.1), 1)


def test_gamma0_needs_sign(degenerate):
    with pytest.raises(ValueError):
        integrate_profile(degenerate, P(0.1))
    with pytest.raises(ValueError):
        find_rho_m_gamma0(degenerate, P(0.1), 0)


def test_profile_conservation_and_monotonicity(quadratic):
    prof = integrate_profile(quadratic, P(0.1))
    assert prof.rho[0] == pytest.approx(0.99, abs=1e-13)
    assert prof.rho_prime[0] == 0
    assert np.max(np.abs(prof.conservation_defect())) <= 1e-9
    assert np.all(np.diff(prof.rho) >= -1e-10)
    assert abs(prof.rho[-1] - 1) <= 1e-10
    assert prof.x_end <= 40 / 0.1
    assert prof.u[0] == pytest.approx(prof.params.c * (prof.rho_m - 1) / prof.rho_m, rel=1e-14)
    assert abs(prof.u[-1]) < 1e-9


def test_profile_decreasing_for_negative_gamma():
    m = make_polynomial_model(-1.0)  # Gamma = -3
    prof = integrate_profile(m, P(0.1))
    assert prof.rho_m > 1
    assert np.all(np.diff(prof.rho) <= 1e-10)
    assert np.max(np.abs(prof.conservation_defect())) <= 1e-9


def test_profile_inverse_rho_capillarity():
    m = make_polynomial_model(0.3, 0.1, "inverse_rho", 2.0)
    prof = integrate_profile(m, P(0.2))
    assert np.max(np.abs(prof.conservation_defect())) <= 1e-9
    r = rescale_to_r(prof)
    assert abs(r.r[0] - 3) <= 0.2 / abs(m.gamma)


def test_ode_rhs_matches_profile_curvature(quadratic):
    prof = integrate_profile(quadratic, P(0.2))
    # rho'' from samples by finite differences in the interior
    h = prof.x[1] - prof.x[0]
    fd = (prof.rho[2:] - 2 * prof.rho[1:-1] + prof.rho[:-2]) / h**2
    # second-order differences carry an O(h**2) truncation of about 2e-5 here
    assert np.max(np.abs(fd - prof.rho_second[1:-1])) < 1e-4 * np.max(np.abs(prof.rho_second))


def test_higher_derivatives_consistent(quadratic):
    prof = integrate_profile(quadratic, P(0.3), dy=0.002)
    d = prof.derivatives(4)
    h = prof.x[1] - prof.x[0]
    for k in (3, 4):
        fd = (d[k - 1][2:] - d[k - 1][:-2]) / (2 * h)
        assert np.max(np.abs(fd - d[k][1:-1])) < 1e-4 * np.max(np.abs(d[k]))


def test_derivative_order_guard(quadratic):
    prof = integrate_profile(quadratic, P(0.3))
    with pytest.raises(ValueError):
        prof.derivatives(5)


def test_phase_portrait_even(quadratic):
    prof = integrate_profile(quadratic, P(0.3))
    rho, rp = phase_portrait(prof)
    assert rho.size == 2 * prof.x.size - 1
    assert np.allclose(rho, rho[::-1]) and np.allclose(rp, -rp[::-1])


def test_large_eps_profile_allowed():
    # illustration regime, outside the convergence assertions
    prof = integrate_profile(make_polynomial_model(), P(0.82))
    assert np.max(np.abs(prof.conservation_defect())) <= 1e-9


def test_rescaled_peak(quadratic):
    for eps in (0.4, 0.2, 0.1):
        r = rescale_to_r(integrate_profile(quadratic, P(eps)), 1)
        assert r.y[0] == 0 and r.derivs[1][0] == 0
        assert 3 - 3 * eps <= r.r[0] <= 3 + 3 * eps


def test_reference_values():
    assert reference_soliton("kdv", 0.0) == 3.0
    assert reference_soliton("mkdv_plus", 0.0) == pytest.approx(math.sqrt(12))
    assert reference_soliton("mkdv_minus", 0.0) == pytest.approx(-math.sqrt(12))
    with pytest.raises(ValueError):
        reference_soliton("nls", 0.0)
    with pytest.raises(ValueError):
        reference_soliton("kdv", 0.0, 5)


def test_reference_kdv_residual():
    y = np.linspace(-12, 12, 50)
    N = reference_soliton("kdv", y)
    N2 = reference_soliton("kdv", y, 2)
    assert np.max(np.abs(N2 - N + N**2 / 2)) <= 1e-12


@pytest.mark.parametrize("kind", ["mkdv_plus", "mkdv_minus"])
def test_reference_mkdv_residual(kind):
    y = np.linspace(-12, 12, 50)
    w = reference_soliton(kind, y)
    w2 = reference_soliton(kind, y, 2)
    assert np.max(np.abs(w2 - w + w**3 / 6)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["kdv", "mkdv_plus", "mkdv_minus"]), st.integers(0, 3),
       st.floats(-8.0, 8.0))
def test_reference_derivatives_chain(kind, k, y):
    h = 1e-5
    fd = (reference_soliton(kind, y + h, k) - reference_soliton(kind, y - h, k)) / (2 * h)
    assert fd == pytest.approx(float(reference_soliton(kind, y, k + 1)), abs=1e-7 * 10**k)


def test_reference_higher_derivative_closed_forms():
    # fourth derivative of the KdV soliton from the ODE: N'''' = N'' - (N N')' = N'' - N'^2 - N N''
    y = np.linspace(-10, 10, 41)
    N, N1, N2, _, N4 = (reference_soliton("kdv", y, k) for k in range(5))
    assert np.max(np.abs(N4 - (N2 - N1**2 - N * N2))) < 1e-12


def test_sup_error_includes_tail(quadratic):
    r = rescale_to_r(integrate_profile(quadratic, P(0.2)), 0)
    errs = sup_errors(r, 0)
    core = np.max(np.abs(r.r - reference_soliton("kdv", r.y)))
    assert errs[0] >= core


def test_convergence_report_quadratic(quadratic):
    rep = convergence_report(quadratic, [0.05, 0.4, 0.1, 0.2], k_max=2)
    assert [row.eps for row in rep.rows if row.k == 0] == [0.4, 0.2, 0.1, 0.05]
    assert all(rep.monotone.values())
    assert rep.errors(0)[-1] <= 0.05


def test_convergence_report_gamma0(degenerate):
    for sign in (1, -1):
        rep = convergence_report(degenerate, [0.4, 0.2, 0.1, 0.05], k_max=1, sign=sign)
        assert rep.kind == ("mkdv_plus" if sign > 0 else "mkdv_minus")
        assert all(rep.monotone.values())


def test_derivative_bound_uniform(quadratic):
    sups = []
    for eps in (0.4, 0.2, 0.1, 0.05):
        r = rescale_to_r(integrate_profile(quadratic, P(eps)), 1)
        sups.append(np.max(np.abs(r.derivs[1])))
    assert max(sups) < 2 * min(sups)
