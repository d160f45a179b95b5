import math

import numpy as np
import pytest

from wavelab import make_polynomial_model
from wavelab.kdv1d import WaveParams1D, integrate_profile
from wavelab.kp2d import energy_kp, sw_residual, transverse_field
from wavelab.models import DegenerateGammaError
from wavelab.reconstruct2d import (ReconstructionError, build_wave_from_lump,
                                   convolution_identity_residual, convolution_residual_from,
                                   energy_decomposition, energy_gap_ratio, physical_energy_momentum,
                                   pohozaev_residuals, remainder_fields)
from wavelab.spectral import Field2D, GridSpec2D, spectral_derivative

MODELS = [make_polynomial_model(), make_polynomial_model(0.3, 0.2, "inverse_rho", 1.7)]


def test_guards(small_state):
    with pytest.raises(ReconstructionError):
        build_wave_from_lump(small_state, 0.9, MODELS[0])
    with pytest.raises(ReconstructionError):
        build_wave_from_lump(small_state, 0.0, MODELS[0])
    with pytest.raises(DegenerateGammaError):
        build_wave_from_lump(small_state, 0.1, make_polynomial_model(-0.5))
    # gamma = 1/0.06 pushes |rho - 1| past 1 at eps = 0.5
    with pytest.raises(ReconstructionError):
        build_wave_from_lump(small_state, 0.5, make_polynomial_model(-0.49))


def test_substitution_identities(ground_state):
    m = MODELS[0]
    w = build_wave_from_lump(ground_state, 0.1, m)
    om = ground_state.omega.values
    assert np.max(np.abs(w.eta)) == pytest.approx(0.01 / 3 * np.max(np.abs(om)), rel=1e-15)
    assert np.max(np.abs(w.theta1.values - om)) <= 1e-10 * np.max(np.abs(om))
    assert w.c == pytest.approx(math.sqrt(0.99))


def test_amplitude_scales_like_eps_squared(ground_state):
    amps = [np.max(np.abs(build_wave_from_lump(ground_state, e, MODELS[0]).eta)) for e in (0.2, 0.1, 0.05)]
    assert amps[0] / amps[1] == pytest.approx(4.0) and amps[1] / amps[2] == pytest.approx(4.0)


@pytest.mark.parametrize("model", MODELS)
def test_energy_momentum_identities(ground_state, model):
    mu, ekp = ground_state.mu, energy_kp(ground_state.omega)
    K1, g = model.K1, model.gamma
    for eps in (0.2, 0.1, 0.05):
        w = build_wave_from_lump(ground_state, eps, model)
        d = energy_decomposition(w)
        E, P = physical_energy_momentum(w)
        assert P == pytest.approx(K1 * g**2 * eps * mu, rel=1e-10)
        assert d.total == pytest.approx(E, rel=1e-8)
        assert d.E0 == pytest.approx(2 * mu, rel=1e-12)
        assert d.E2 / 2 == pytest.approx(ekp, rel=1e-10)
        three_term = K1 * g**2 * eps * mu + K1 * g**2 * eps**3 * ekp + 0.5 * K1 * g**2 * eps**5 * d.E4
        assert three_term == pytest.approx(E, rel=1e-8)


def test_e4_j_term_vanishes_for_constant_K(ground_state):
    m = make_polynomial_model(0.2, 0.1)
    w = build_wave_from_lump(ground_state, 0.1, m)
    N = w.N.values
    t2 = transverse_field(ground_state.omega).values
    N2 = spectral_derivative(N, w.grid, 0, 1)
    expected = np.sum(N2**2 - m.gamma * N * t2**2 + 2 * m.gamma**2 * N**4 * m.a4) * w.grid.cell_area
    assert energy_decomposition(w).E4 == pytest.approx(expected, rel=1e-12)


def test_energy_gap_ladder(ground_state):
    ekp = ground_state.e_kp
    gaps = [abs(energy_gap_ratio(build_wave_from_lump(ground_state, e, MODELS[0])) / ekp - 1)
            for e in (0.2, 0.1, 0.05)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] <= 0.15
    # remainder is first order in eps**2
    assert gaps[0] / gaps[1] == pytest.approx(4, rel=0.1)


def test_pohozaev_ladder(ground_state):
    rows = [pohozaev_residuals(build_wave_from_lump(ground_state, e, MODELS[0])) for e in (0.2, 0.1, 0.05)]
    for k in range(3):
        mags = [abs(r[k]) for r in rows]
        assert np.all(np.diff(mags) < 0)
    d2 = [abs(r.D2) for r in rows]
    slope = np.polyfit(np.log([0.2, 0.1, 0.05]), np.log(d2), 1)[0]
    assert slope >= 1


def test_remainder_fields_reconstructed(ground_state):
    m = MODELS[0]
    om = ground_state.omega.values
    prev = None
    for eps in (0.2, 0.1, 0.05):
        w = build_wave_from_lump(ground_state, eps, m)
        r = remainder_fields(w)
        # N = d1 theta makes f = w**2 / 2 exactly
        assert np.max(np.abs(r.f - 0.5 * om**2)) <= 1e-12 * np.max(om**2)
        assert np.allclose(r.R11, m.gamma * w.c * om * w.theta2.values, rtol=0, atol=1e-14)
        res = convolution_identity_residual(w)
        if prev is not None:
            assert res < prev
        prev = res


def test_eps_zero_limit_is_kp_residual(ground_state):
    w = build_wave_from_lump(ground_state, 0.1, MODELS[0])
    r0 = convolution_identity_residual(w, eps=0.0)
    assert abs(r0 - sw_residual(ground_state.omega)) <= 1e-10


def _one_dimensional_solution(model, eps):
    """An x2-independent exact traveling wave laid out on a 2D grid."""
    prof = integrate_profile(model, WaveParams1D(eps))
    g = GridSpec2D(40.96, 8.0, 1024, 64)  # rescaled spacing 0.08 = 8 profile samples
    idx = np.abs(np.arange(g.N1) - g.N1 // 2) * 8
    eta = np.zeros(g.N1)
    ok = idx < prof.x.size
    eta[ok] = prof.eta[idx[ok]]
    N = -eta / (eps**2 * model.gamma)
    theta1 = math.sqrt(1 - eps**2) * N / (1 + eta)  # mass flux: rho phi' = c (rho - 1)
    tile = lambda a: np.repeat(a[:, None], g.N2, axis=1)
    return Field2D(tile(N), g), tile(theta1)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("eps", [0.3, 0.1])
def test_convolution_identity_exact_on_1d_soliton(model, eps):
    N, theta1 = _one_dimensional_solution(model, eps)
    res = convolution_residual_from(N, theta1, np.zeros_like(theta1), eps, model, drop_mean=True)
    assert res <= 1e-7
    # swapping in theta1 = N (the KP-level reconstruction) breaks the identity
    crude = convolution_residual_from(N, N.values, np.zeros_like(theta1), eps, model, drop_mean=True)
    assert crude > 100 * res
