"""Speed-one KP-I solitary waves as fixed points of ``w = K0 * (w**2 / 2)``.

``K0`` has symbol ``xi1**2 / (xi1**2 + xi2**2 + xi1**4)``.  Fields live on a
periodic box (see ``spectral.GridSpec2D``); the lump decays like
``|x|**-2`` so box truncation biases every integral by O(L**-2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .spectral import (Field2D, GridSpec2D, fft2, ifft2_real, project_zero_x1_mean, safe_divide,
                       x1_mean_defect)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
DEFAULT_STAB_EXPONENT = 2.0
# |log M| beyond this after the first step counts as divergence
M_GUARD = math.log(10.0)


class KPSolveError(RuntimeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class CollapseError(KPSolveError):
    """The iterate shrank to the zero field."""


class DivergenceError(KPSolveError):
    """The stabilizing factor left its guard band."""


class StagnationError(KPSolveError):
    """``max_iter`` reached above tolerance; ``state`` holds the last iterate."""


def k0_hat(xi1, xi2, sigma: float = 1.0):
    """Symbol of the speed-``sigma`` kernel, zero at the origin."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    a = xi1 * xi1
    return safe_divide(a, sigma * a + xi2 * xi2 + a * a)


def _k0_on(grid: GridSpec2D, sigma: float = 1.0) -> np.ndarray:
    xi1, xi2 = grid.wavenumbers()
    return k0_hat(xi1, xi2, sigma)


def _half_square_conv(values, k0):
    return ifft2_real(0.5 * k0 * fft2(values * values))


def sw_residual(omega: Field2D, sigma: float = 1.0) -> float:
    """``||w - K_sigma * w**2 / 2|| / ||w||`` (absolute norm for the zero field)."""
    w = omega.values
    r = np.linalg.norm(w - _half_square_conv(w, _k0_on(omega.grid, sigma)))
    n = np.linalg.norm(w)
    if n == 0:
        return float(r * math.sqrt(omega.grid.cell_area))
    return float(r / n)


class KPEnergyTerms(NamedTuple):
    grad: float  # int (d1 w)^2
    transverse: float  # int (d1^-1 d2 w)^2
    cubic: float  # int w^3
    mean_defect: float

    @property
    def energy(self) -> float:
        return 0.5 * self.grad + 0.5 * self.transverse - self.cubic / 6.0


def energy_kp_terms(omega: Field2D) -> KPEnergyTerms:
    grid = omega.grid
    defect = x1_mean_defect(omega.values)
    w = project_zero_x1_mean(omega.values)
    wh = fft2(w)
    xi1, xi2 = grid.wavenumbers()
    power = np.abs(wh) ** 2 * grid.cell_area / w.size  # Parseval weight
    grad = float(np.sum(xi1**2 * power))
    transverse = float(np.sum(safe_divide(xi2**2, xi1**2) * power))
    cubic = float(np.sum(w**3) * grid.cell_area)
    return KPEnergyTerms(grad, transverse, cubic, defect)


def energy_kp(omega: Field2D) -> float:
    """``1/2 int (d1 w)^2 + 1/2 int (d1^-1 d2 w)^2 - 1/6 int w^3``."""
    return energy_kp_terms(omega).energy


@dataclass
class GroundState2D:
    omega: Field2D
    mu: float
    e_kp: float
    action: float
    residual: float
    iters: int
    history: list = field(default_factory=list, repr=False)

    @property
    def grid(self) -> GridSpec2D:
        return self.omega.grid

    def summary(self) -> dict:
        return {"mu": self.mu, "e_kp": self.e_kp, "action": self.action,
                "residual": self.residual, "iters": self.iters}


def default_init(grid: GridSpec2D) -> Field2D:
    """Anisotropic Gaussian centred at the origin."""
    X1, X2 = grid.mesh()
    return Field2D(6.0 * np.exp(-(X1**2 / 2.0 + X2**2 / 4.0)), grid)


def center_on_max(values: np.ndarray) -> np.ndarray:
    """Roll so that the maximum sits at the grid origin."""
    n1, n2 = values.shape
    i, j = np.unravel_index(np.argmax(values), values.shape)
    return np.roll(values, (n1 // 2 - i, n2 // 2 - j), axis=(0, 1))


def reflection_defects(values: np.ndarray) -> tuple[float, float]:
    """Relative odd parts in x1 and in x2 about the grid origin."""
    scale = np.max(np.abs(values))
    if scale == 0:
        return 0.0, 0.0
    r1 = np.roll(values[::-1, :], 1, axis=0)
    r2 = np.roll(values[:, ::-1], 1, axis=1)
    return float(np.max(np.abs(values - r1)) / scale), float(np.max(np.abs(values - r2)) / scale)


def make_state(omega: Field2D, residual: float | None = None, iters: int = 0) -> GroundState2D:
    mu = omega.l2_norm() ** 2
    e = energy_kp(omega)
    if residual is None:
        residual = sw_residual(omega)
    return GroundState2D(omega=omega, mu=mu, e_kp=e, action=e + 0.5 * mu, residual=residual,
                         iters=iters)


def petviashvili_solve(grid: GridSpec2D, init: Field2D | None = None, *, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER,
                       stab_exponent: float = DEFAULT_STAB_EXPONENT,
                       center: bool = True) -> GroundState2D:
    """Petviashvili iteration ``w <- M**s T(w)``, ``T(w) = K0 * w**2 / 2``.

    ``M = <w, w> / <w, T(w)>`` tends to 1 at a fixed point.  Stops when the
    relative residual ``||w - T(w)|| / ||w||`` is at most ``tol``.
    """
    if init is None:
        init = default_init(grid)
    if init.grid != grid:
        raise ValueError("initial field lives on a different grid")
    # the unpaired Nyquist modes are dropped too, so that x1-antiderivatives
    # and odd derivatives of the result are exact on the grid
    k0_full = _k0_on(grid)
    k0 = k0_full.copy()
    k0[grid.N1 // 2, :] = 0.0
    k0[:, grid.N2 // 2] = 0.0
    k0_dropped = 0.5 * (k0_full - k0)
    w = project_zero_x1_mean(init.values)
    norm0 = np.linalg.norm(w)
    if not norm0 > 0 or not np.isfinite(norm0):
        raise CollapseError("initial field is zero after removing its x1-means")

    history = []
    res = math.inf
    for it in range(max_iter + 1):
        sq = fft2(w * w)
        Tw = ifft2_real(0.5 * k0 * sq)
        nw = np.linalg.norm(w)
        # residual of the full equation, Nyquist modes included
        res = float(np.linalg.norm(w - Tw - ifft2_real(k0_dropped * sq)) / nw)
        history.append(res)
        if res <= tol:
            break
        if it == max_iter:
            state = make_state(Field2D(w, grid), res, it)
            raise StagnationError(f"residual {res:.3e} > tol {tol:.1e} after {max_iter} iterations",
                                  state)
        denom = float(np.vdot(w, Tw))
        if not denom > 0:
            raise CollapseError(f"<w, T(w)> = {denom:.3e} is not positive at iteration {it}")
        M = float(nw * nw / denom)
        if it > 0 and (not math.isfinite(M) or abs(math.log(M)) > M_GUARD):
            raise DivergenceError(f"stabilizing factor M = {M:.3e} at iteration {it}")
        w = M**stab_exponent * Tw
        n_new = np.linalg.norm(w)
        if not np.isfinite(n_new):
            raise DivergenceError(f"iterate blew up at iteration {it}")
        if n_new < 1e-12 * norm0:
            raise CollapseError(f"iterate collapsed to zero at iteration {it}")

    if center:
        w = center_on_max(w)
    state = make_state(Field2D(w, grid), None, it)
    state.history = history
    return state


def petviashvili_step(omega: Field2D, stab_exponent: float = DEFAULT_STAB_EXPONENT) -> Field2D:
    """One stabilized fixed-point step."""
    w = omega.values
    Tw = _half_square_conv(w, _k0_on(omega.grid))
    M = float(np.vdot(w, w) / np.vdot(w, Tw))
    return omega.like(M**stab_exponent * Tw)


def antiderivative_x1(omega: Field2D, strict: bool = False) -> Field2D:
    """``v`` with ``d1 v = w`` and zero x1-mean on every line."""
    defect = x1_mean_defect(omega.values)
    if defect > 1e-10:
        msg = f"field has non-zero x1-means (relative {defect:.2e}); they are dropped"
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    grid = omega.grid
    xi1 = grid.xi1.copy()
    xi1[grid.N1 // 2] = 0.0  # Nyquist has no real antiderivative
    sym = safe_divide(np.ones_like(xi1), xi1)[:, None]
    return omega.like(ifft2_real(-1j * sym * fft2(omega.values)))


def transverse_field(omega: Field2D) -> Field2D:
    """``d1^-1 d2 w``."""
    grid = omega.grid
    xi1, xi2 = grid.wavenumbers()
    xi1 = xi1.copy()
    xi1[grid.N1 // 2, :] = 0.0
    xi2 = xi2.copy()
    xi2[:, grid.N2 // 2] = 0.0
    return omega.like(ifft2_real(safe_divide(xi2, xi1) * fft2(omega.values)))


def gradient_norm(field_: Field2D) -> float:
    """``||grad v||_2`` computed spectrally."""
    grid = field_.grid
    xi1, xi2 = grid.wavenumbers()
    power = np.abs(fft2(field_.values)) ** 2 * grid.cell_area / field_.values.size
    return float(math.sqrt(np.sum((xi1**2 + xi2**2) * power)))


# scaling

@dataclass
class RescaleReport:
    field: Field2D
    sigma: float
    tail_fraction: float  # share of int w**2 the rescaled samples never see

    @property
    def tail_warning(self) -> bool:
        return self.tail_fraction > 0.01


def _interp_matrix(grid_L: float, n: int, xi: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(targets + grid_L, xi)) / n


def rescale_sigma(omega: Field2D, sigma: float) -> RescaleReport:
    """``N_sigma(x1, x2) = sigma * w(sqrt(sigma) x1, sigma x2)`` on the same grid.

    Values come from the trigonometric interpolant of ``w``.  Target points
    that leave the box are set to zero rather than wrapped: their periodic
    images would re-enter the core of ``w`` and double count it.  For
    ``sigma < 1`` the samples only see the sub-box
    ``|x1| < sqrt(sigma) L1, |x2| < sigma L2``; the share of ``int w**2``
    outside it is reported as ``tail_fraction``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    grid = omega.grid
    t1 = math.sqrt(sigma) * grid.x1
    t2 = sigma * grid.x2
    E1 = _interp_matrix(grid.L1, grid.N1, grid.xi1, t1)
    E2 = _interp_matrix(grid.L2, grid.N2, grid.xi2, t2)
    vals = sigma * np.real(E1 @ fft2(omega.values) @ E2.T)
    # half-open box, with slack for points on its edge
    out1 = (t1 < -grid.L1 * (1 + 1e-12)) | (t1 >= grid.L1)
    out2 = (t2 < -grid.L2 * (1 + 1e-12)) | (t2 >= grid.L2)
    vals[out1[:, None] | out2[None, :]] = 0.0

    w2 = omega.values**2
    seen1 = np.abs(grid.x1) <= min(1.0, math.sqrt(sigma)) * grid.L1
    seen2 = np.abs(grid.x2) <= min(1.0, sigma) * grid.L2
    total = float(np.sum(w2))
    frac = 1.0 - float(np.sum(w2[np.ix_(seen1, seen2)])) / total if total > 0 else 0.0
    if frac > 0.01:
        warnings.warn(f"rescale_sigma: {100 * frac:.2f}% of int w^2 lies outside the sampled region",
                      RuntimeWarning, stacklevel=2)
    return RescaleReport(field=omega.like(vals), sigma=sigma, tail_fraction=max(frac, 0.0))


def rescale_sigma_exact(omega: Field2D, sigma: float) -> Field2D:
    """``N_sigma`` sampled exactly on the rescaled box ``(L1/sqrt(sigma), L2/sigma)``.

    The samples are ``sigma * w`` at the original points, so the discrete
    periodic structure is carried over unchanged.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    g = omega.grid
    return Field2D(sigma * omega.values, g.scaled(1.0 / math.sqrt(sigma), 1.0 / sigma))


def cubic_law_defect(state: GroundState2D) -> float:
    """Relative gap in ``E = -mu**3 / (54 S**2)``."""
    predicted = -state.mu**3 / (54.0 * state.action**2)
    return abs(state.e_kp - predicted) / abs(predicted)


def energy_identity_defect(state: GroundState2D) -> float:
    """Relative gap in ``E = -mu / 6``."""
    return abs(state.e_kp + state.mu / 6.0) / (state.mu / 6.0)
