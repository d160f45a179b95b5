"""Approximate 2D Euler-Korteweg traveling waves built from a KP-I lump.

With ``z = (eps x1, eps**2 x2) / sqrt(K(1))`` the wave is

    rho = 1 - eps**2 gamma N(z),     phi = -gamma sqrt(K(1)) eps theta(z),

and the reconstruction takes ``N = w``, ``theta = v`` with ``d1 v = w``.
Traveling waves of speed ``c`` solve

    c d1 rho = div(rho grad phi)
    c d1 phi = |grad phi|**2 / 2 + g(rho) - K(rho) Lap rho - K'(rho) |grad rho|**2 / 2.

All integrals are trapezoidal sums on the rescaled periodic grid, with the
Jacobian ``dx = K(1) / eps**3 dz`` applied analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .kernels import KernelSpec, apply_multiplier
from .kp2d import GroundState2D, antiderivative_x1, transverse_field
from .models import FluidModel, ModelError
from .spectral import Field2D, spectral_derivative

EPS_MAX = 0.5


class ReconstructionError(ValueError):
    pass


@dataclass
class ReconstructedWave:
    omega: Field2D
    v: Field2D
    eps: float
    model: FluidModel
    N: Field2D
    theta1: Field2D  # d1 theta on the rescaled grid
    theta2: Field2D  # d2 theta

    @property
    def c(self) -> float:
        return math.sqrt(1.0 - self.eps**2)

    @property
    def grid(self):
        return self.N.grid

    @property
    def eta(self) -> np.ndarray:
        """``rho - 1`` at the rescaled grid points."""
        return -self.eps**2 * self.model.gamma * self.N.values

    @property
    def phi(self) -> np.ndarray:
        return -self.model.gamma * math.sqrt(self.model.K1) * self.eps * self.v.values

    def physical_coordinates(self):
        """Physical ``(x1, x2)`` axes of the samples."""
        s = math.sqrt(self.model.K1)
        g = self.grid
        return g.x1 * s / self.eps, g.x2 * s / self.eps**2


def build_wave_from_lump(state: GroundState2D | Field2D, eps: float, model: FluidModel) -> ReconstructedWave:
    omega = state.omega if isinstance(state, GroundState2D) else state
    if not 0.0 < eps <= EPS_MAX:
        raise ReconstructionError(f"eps must lie in (0, {EPS_MAX}], got {eps}")
    gamma = model.gamma  # raises on the Gamma = 0 branch
    amp = eps**2 * abs(gamma) * float(np.max(np.abs(omega.values)))
    if amp >= 1.0:
        raise ReconstructionError(f"density would leave (0, 2): |rho - 1|_max = {amp:.3f}")
    v = antiderivative_x1(omega)
    wave = ReconstructedWave(omega=omega, v=v, eps=float(eps), model=model, N=omega,
                             theta1=omega.like(spectral_derivative(v.values, v.grid, 1, 0)),
                             theta2=transverse_field(omega))
    try:
        K = model.K_offset(wave.eta)
    except ModelError as exc:
        raise ReconstructionError(str(exc)) from exc
    if np.any(K <= 0):
        raise ReconstructionError("capillarity is not positive on the reconstructed density")
    return wave


# energy and momentum

class EnergyDecomposition(NamedTuple):
    E0: float
    E2: float
    E4: float
    prefactor: float  # K(1) gamma**2 / 2
    eps: float

    @property
    def total(self) -> float:
        e = self.eps
        return self.prefactor * (e * self.E0 + e**3 * self.E2 + e**5 * self.E4)


def energy_decomposition(wave: ReconstructedWave) -> EnergyDecomposition:
    """Coefficients of ``E = K(1) gamma**2 / 2 * (eps E0 + eps**3 E2 + eps**5 E4)``.

    Exact for the polynomial model family: ``K(1 + X) = K(1) + X j(X)`` and
    ``G(1 + X) = X**2/2 + g''(1) X**3 / 6 + X**4 l4(X)`` with
    ``X = -eps**2 gamma N``.
    """
    m, eps = wave.model, wave.eps
    g = wave.grid
    gamma, K1, g2 = m.gamma, m.K1, m.g2
    N, t1, t2 = wave.N.values, wave.theta1.values, wave.theta2.values
    N1 = spectral_derivative(N, g, 1, 0)
    N2 = spectral_derivative(N, g, 0, 1)
    X = -eps**2 * gamma * N
    jx = m.taylor_remainders(X).j
    l4 = m.quartic_remainder(X)
    dA = g.cell_area
    E0 = np.sum(N**2 + t1**2) * dA
    E2 = np.sum(N1**2 + t2**2 - gamma * N * t1**2 - gamma * g2 * N**3 / 3.0) * dA
    E4 = np.sum(m.K_offset(X) * N2**2 / K1 - gamma * N * t2**2 - gamma * N * jx * N1**2 / K1
                + 2.0 * gamma**2 * N**4 * l4) * dA
    return EnergyDecomposition(float(E0), float(E2), float(E4), 0.5 * K1 * gamma**2, eps)


class PhysicalGradients(NamedTuple):
    rho: np.ndarray
    K: np.ndarray
    r1: np.ndarray  # d rho / d x1
    r2: np.ndarray
    p1: np.ndarray  # d phi / d x1
    p2: np.ndarray
    G: np.ndarray
    jac: float  # physical area per rescaled cell


def _physical_gradients(wave: ReconstructedWave) -> PhysicalGradients:
    m, eps, g = wave.model, wave.eps, wave.grid
    s = math.sqrt(m.K1)
    eta, phi = wave.eta, wave.phi
    d1, d2 = eps / s, eps**2 / s
    return PhysicalGradients(
        rho=1.0 + eta,
        K=m.K_offset(eta),
        r1=d1 * spectral_derivative(eta, g, 1, 0),
        r2=d2 * spectral_derivative(eta, g, 0, 1),
        p1=d1 * spectral_derivative(phi, g, 1, 0),
        p2=d2 * spectral_derivative(phi, g, 0, 1),
        G=m.G_offset(eta),
        jac=g.cell_area * m.K1 / eps**3,
    )


def physical_energy_momentum(wave: ReconstructedWave) -> tuple[float, float]:
    """``E = int K|grad rho|^2/2 + rho|grad phi|^2/2 + G(rho)`` and ``P = int (rho-1) d1 phi``.

    Evaluated from the sampled ``rho - 1`` and ``phi`` themselves, independently
    of the rescaled-variable expansion.
    """
    p = _physical_gradients(wave)
    dens = 0.5 * p.K * (p.r1**2 + p.r2**2) + 0.5 * p.rho * (p.p1**2 + p.p2**2) + p.G
    E = float(np.sum(dens) * p.jac)
    P = float(np.sum((p.rho - 1.0) * p.p1) * p.jac)
    return E, P


class PohozaevDefects(NamedTuple):
    D1: float
    D2: float
    D3: float
    E: float
    P: float


def pohozaev_residuals(wave: ReconstructedWave) -> PohozaevDefects:
    """Three Pohozaev defects normalized by the energy."""
    p = _physical_gradients(wave)
    E, P = physical_energy_momentum(wave)
    c = wave.c
    I2 = float(np.sum(p.rho * p.p2**2 + p.K * p.r2**2) * p.jac)
    I1 = float(np.sum(p.rho * p.p1**2 + p.K * p.r1**2) * p.jac)
    Iphi = float(np.sum(p.rho * (p.p1**2 + p.p2**2)) * p.jac)
    return PohozaevDefects((E - I2 - c * P) / E, (E - I1) / E, (c * P - Iphi) / E, E, P)


# remainder fields of the recast system

class RemainderFields(NamedTuple):
    f: np.ndarray
    R20: np.ndarray
    R11: np.ndarray
    R02: np.ndarray


def remainder_fields_from(N: np.ndarray, theta1: np.ndarray, theta2: np.ndarray, grid,
                          eps: float, model: FluidModel) -> RemainderFields:
    """Source terms of ``N = K20 * f + eps**2 (K20 * R20 + K11 * R11 + K02 * R02)``.

    Exact rearrangement of the traveling-wave system for any ``(N, theta)``;
    the identity holds precisely when ``(N, theta)`` solves it.  With
    ``X = -eps**2 gamma N``:

    * ``h1 = K(1)/K(1+X) - 1 = X h3(X)``
    * ``h2 = N - c theta1 - eps**2 B`` and ``B`` the quadratic-and-higher part
      of the Bernoulli equation divided by ``-gamma eps**2``
    """
    if not eps > 0:
        raise ValueError("remainder fields need eps > 0")
    gamma, K1, g2 = model.gamma, model.K1, model.g2
    c = math.sqrt(1.0 - eps * eps)
    X = -eps**2 * gamma * N
    rem = model.taylor_remainders(X)
    Kp = model.dK_offset(X)
    N1 = spectral_derivative(N, grid, 1, 0)
    N2 = spectral_derivative(N, grid, 0, 1)
    grad_term = gamma * Kp / (2.0 * K1)
    # B split by order: B = B0 + eps**2 B2 + eps**4 B4
    B0 = gamma * g2 * N**2 / 2.0 + gamma * theta1**2 / 2.0
    B2 = -gamma**2 * N**3 * rem.l1 + gamma * theta2**2 / 2.0 - grad_term * N1**2
    B4 = -grad_term * N2**2
    # h2 / eps**2, with 1 - c = eps**2 / (1 + c)
    h2_e2 = (N - theta1) / eps**2 + theta1 / (1.0 + c) - (B0 + eps**2 * B2 + eps**4 * B4)
    h1_e2 = -gamma * N * rem.h3  # h1 / eps**2
    h1h2_e4 = h1_e2 * h2_e2

    f = gamma * (N * theta1 + g2 * N**2 / 2.0 + theta1**2 / 2.0)
    R20 = -gamma * N * theta1 / (1.0 + c) + B2 + eps**2 * B4 - h1h2_e4
    R11 = gamma * c * N * theta2
    R02 = B0 + eps**2 * B2 + eps**4 * B4 - eps**2 * h1h2_e4
    return RemainderFields(f, R20, R11, R02)


def remainder_fields(wave: ReconstructedWave) -> RemainderFields:
    return remainder_fields_from(wave.N.values, wave.theta1.values, wave.theta2.values,
                                 wave.grid, wave.eps, wave.model)


def convolution_residual_from(N: Field2D, theta1: np.ndarray, theta2: np.ndarray, eps: float,
                              model: FluidModel, drop_mean: bool = False) -> float:
    """``||N - K20*f - eps**2 sum K^{ij}*R^{ij}|| / ||N||``.

    At ``eps = 0`` only ``K20 * f`` is kept.  ``drop_mean`` compares without
    the zero mode, which every kernel annihilates.
    """
    grid = N.grid
    if eps == 0:
        gamma, g2 = model.gamma, model.g2
        n, t1 = N.values, theta1
        f = gamma * (n * t1 + g2 * n**2 / 2.0 + t1**2 / 2.0)
        rhs = apply_multiplier(N.like(f), KernelSpec(2, 0, 0.0)).values
    else:
        r = remainder_fields_from(N.values, theta1, theta2, grid, eps, model)
        rhs = apply_multiplier(N.like(r.f + eps**2 * r.R20), KernelSpec(2, 0, eps)).values
        rhs = rhs + eps**2 * apply_multiplier(N.like(r.R11), KernelSpec(1, 1, eps)).values
        rhs = rhs + eps**2 * apply_multiplier(N.like(r.R02), KernelSpec(0, 2, eps)).values
    target = N.values - N.values.mean() if drop_mean else N.values
    return float(np.linalg.norm(target - rhs) / np.linalg.norm(target))


def convolution_identity_residual(wave: ReconstructedWave, eps: float | None = None) -> float:
    """Distance of the reconstruction from an exact solution of the recast system.

    ``eps`` overrides the wave's own value; ``eps = 0`` reduces to the KP-I
    fixed-point residual.
    """
    e = wave.eps if eps is None else float(eps)
    return convolution_residual_from(wave.N, wave.theta1.values, wave.theta2.values, e, wave.model)


def energy_gap_ratio(wave: ReconstructedWave) -> float:
    """``(E - P) / (K(1) gamma**2 eps**3)``."""
    E, P = physical_energy_momentum(wave)
    m = wave.model
    return (E - P) / (m.K1 * m.gamma**2 * wave.eps**3)
