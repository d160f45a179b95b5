"""Anisotropic Fourier multipliers ``xi1**i xi2**j / Q_eps(xi)``.

``Q_eps = |xi|**2 + xi1**4 + 2 eps**2 xi1**2 xi2**2 + eps**4 xi2**4`` is the
symbol of ``L = -Lap + d1**4 + 2 eps**2 d1**2 d2**2 + eps**4 d2**4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .spectral import Field2D, GridSpec2D, apply_symbol, safe_divide, spectral_derivative

CONVOLUTION_PAIRS = ((2, 0), (1, 1), (0, 2))


class NonConvergentTailError(RuntimeError):
    """The truncated norm integral kept growing with the truncation radius."""


@dataclass(frozen=True)
class KernelSpec:
    i: int
    j: int
    eps: float = 0.0

    def __post_init__(self):
        if self.i < 0 or self.j < 0 or not 2 <= self.i + self.j <= 4:
            raise ValueError(f"need i, j >= 0 and 2 <= i + j <= 4, got ({self.i}, {self.j})")
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be >= 0, got {self.eps}")

    @property
    def kappa(self) -> int:
        return max(self.i + 2 * self.j - 4, 0)


def q_symbol(xi1, xi2, eps: float):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    a, b, e2 = xi1 * xi1, xi2 * xi2, eps * eps
    return a + b + a * a + 2.0 * e2 * a * b + e2 * e2 * b * b


def kernel_hat(spec: KernelSpec, xi1, xi2):
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return safe_divide(xi1**spec.i * xi2**spec.j, q_symbol(xi1, xi2, spec.eps))


def kernel_on_grid(spec: KernelSpec, grid: GridSpec2D) -> np.ndarray:
    xi1, xi2 = grid.wavenumbers()
    return kernel_hat(spec, xi1, xi2)


def apply_multiplier(field: Field2D, spec: KernelSpec) -> Field2D:
    """``K^{i,j}_eps * field`` via the discrete transform (real part kept)."""
    return field.like(apply_symbol(field.values, kernel_on_grid(spec, field.grid)))


def apply_L(field: Field2D, eps: float) -> Field2D:
    """``-Lap u + d1^4 u + 2 eps^2 d1^2 d2^2 u + eps^4 d2^4 u`` from spectral derivatives."""
    u, g = field.values, field.grid
    d = lambda a, b: spectral_derivative(u, g, a, b)
    e2 = eps * eps
    return field.like(-d(2, 0) - d(0, 2) + d(4, 0) + 2.0 * e2 * d(2, 2) + e2 * e2 * d(0, 4))


def inversion_identity_check(field: Field2D, eps: float) -> tuple[float, dict]:
    """Check ``K^{i,j} * (L u) = -d1^i d2^j u`` for the three second-order pairs.

    ``L u`` and the mixed derivative are built from separate spectral
    derivative calls, so agreement tests the symbol algebra rather than
    restating it.  Returns the worst relative sup error and the per-pair map.
    """
    Lu = apply_L(field, eps)
    errs = {}
    for i, j in CONVOLUTION_PAIRS:
        lhs = apply_multiplier(Lu, KernelSpec(i, j, eps)).values
        rhs = -spectral_derivative(field.values, field.grid, i, j)
        scale = np.max(np.abs(rhs))
        errs[(i, j)] = float(np.max(np.abs(lhs - rhs)) / scale) if scale > 0 else float(np.max(np.abs(lhs)))
    return max(errs.values()), errs


# homogeneous Sobolev norms over R^2

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
PANELS_PER_UNIT = 8
TRUNCATIONS = (10.0, 20.0, 30.0, 40.0)
TAIL_RTOL = 1e-3


def _norm_sq(spec: KernelSpec, s: float, T: float) -> float:
    """``int_{R^2} |xi|^{2s} K(xi)^2 dxi / (2 pi)^2`` with ``ln|xi_k|`` in ``[-T, T]``.

    The symbol squared is even in each variable, so one quadrant is
    integrated in logarithmic coordinates and multiplied by four.  The inner
    variable uses composite Gauss-Legendre, the outer adaptive quadrature with
    breakpoints at the scales ``1, 1/eps, 1/eps**2`` where the symbol bends.
    """
    i, j, eps = spec.i, spec.j, spec.eps
    edges = np.linspace(-T, T, int(PANELS_PER_UNIT * 2 * T) + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    a = (half * _GL_X + mid).ravel()
    wts = (half * _GL_W).ravel()
    x1 = np.exp(a)
    x1sq = x1 * x1
    e2 = eps * eps

    def inner(b):
        x2 = math.exp(b)
        x2sq = x2 * x2
        Q = x1sq + x2sq + x1sq * x1sq + 2.0 * e2 * x1sq * x2sq + e2 * e2 * x2sq * x2sq
        k = x1**i * x2**j / Q
        return float(np.sum(wts * k * k * (x1sq + x2sq) ** s * x1 * x2))

    points = [0.0]
    if eps > 0:
        points += [p for p in (-math.log(eps), -2.0 * math.log(eps)) if -T < p < T]
    val, _ = integrate.quad(inner, -T, T, limit=500, epsrel=1e-10, points=points)
    return 4.0 * val / (2.0 * math.pi) ** 2


def kernel_sobolev_norm(spec: KernelSpec, s: float) -> float:
    """Homogeneous ``H^s`` norm of the kernel, i.e. ``|| |xi|^s K_hat ||_{L^2}``.

    The truncation is grown until the value changes by less than 0.1%.
    """
    if not 0.0 <= s < 1.0:
        raise ValueError("s must lie in [0, 1)")
    prev = None
    for T in TRUNCATIONS:
        val = _norm_sq(spec, s, T)
        if not math.isfinite(val):
            break
        if prev is not None and abs(val - prev) <= TAIL_RTOL * val:
            return math.sqrt(val)
        prev = val
    raise NonConvergentTailError(
        f"norm of K^({spec.i},{spec.j}) at eps={spec.eps}, s={s} did not settle up to |ln xi| = {TRUNCATIONS[-1]}")


def fit_loglog_slope(eps: Sequence[float], values: Sequence[float]) -> float:
    return float(np.polyfit(np.log(np.asarray(eps, float)), np.log(np.asarray(values, float)), 1)[0])


def combination_norm(eps: float, s: float) -> float:
    """``||K^{2,0}|| + eps ||K^{1,1}|| + eps**2 ||K^{0,2}||`` in ``H^s``."""
    return (kernel_sobolev_norm(KernelSpec(2, 0, eps), s)
            + eps * kernel_sobolev_norm(KernelSpec(1, 1, eps), s)
            + eps**2 * kernel_sobolev_norm(KernelSpec(0, 2, eps), s))


# Lizorkin multiplier constant

def _q_partials(xi1, xi2, eps):
    e2 = eps * eps
    Q = q_symbol(xi1, xi2, eps)
    Q1 = 2 * xi1 + 4 * xi1**3 + 4 * e2 * xi1 * xi2**2
    Q2 = 2 * xi2 + 4 * e2 * xi1**2 * xi2 + 4 * e2 * e2 * xi2**3
    Q12 = 8 * e2 * xi1 * xi2
    return Q, Q1, Q2, Q12


def lizorkin_terms(spec: KernelSpec, xi1, xi2) -> dict:
    """Pointwise ``|xi1|^k1 |xi2|^k2 |d1^k1 d2^k2 K_hat|`` for k1, k2 in {0, 1}.

    Written as ``K_hat`` times logarithmic derivatives so the weights never
    meet a division by ``xi``.
    """
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    i, j = spec.i, spec.j
    Q, Q1, Q2, Q12 = _q_partials(xi1, xi2, spec.eps)
    K = kernel_hat(spec, xi1, xi2)
    a = safe_divide(xi1 * Q1, Q)  # xi1 d1 log Q
    b = safe_divide(xi2 * Q2, Q)
    c = safe_divide(xi1 * xi2 * Q12, Q)
    return {
        (0, 0): np.abs(K),
        (1, 0): np.abs(K * (i - a)),
        (0, 1): np.abs(K * (j - b)),
        (1, 1): np.abs(K * (i * j - i * b - j * a - c + 2.0 * a * b)),
    }


def lizorkin_constant(spec: KernelSpec, decades: float = 8.0, per_decade: int = 50) -> tuple[float, dict]:
    """Sup of the Lizorkin weighted derivatives over a signed log-spaced grid.

    Returns ``(M, {(k1, k2): sup})``.
    """
    if spec.i + spec.j < 2:
        raise ValueError("Lizorkin constant needs i + j >= 2")
    pos = np.logspace(-decades, decades, int(2 * decades * per_decade) + 1)
    axis = np.concatenate([-pos[::-1], pos])
    X1, X2 = np.meshgrid(axis, axis, indexing="ij")
    terms = {k: float(np.max(v)) for k, v in lizorkin_terms(spec, X1, X2).items()}
    return max(terms.values()), terms


# white-noise operator probe

def operator_norm_probe(spec_pairs: Sequence[tuple[int, int]], eps_ladder: Sequence[float],
                        grid: GridSpec2D, seed: int = 0, samples: int = 4) -> dict:
    """Mean ``||K * w|| / ||w||`` over white-noise fields ``w`` for each pair and eps.

    The same noise realizations are reused across the ladder.
    """
    rng = np.random.default_rng(seed)
    fields = [rng.standard_normal(grid.shape) for _ in range(samples)]
    out = {}
    for i, j in spec_pairs:
        vals = []
        for eps in eps_ladder:
            sym = kernel_on_grid(KernelSpec(i, j, eps), grid)
            ratios = [np.linalg.norm(apply_symbol(w, sym)) / np.linalg.norm(w) for w in fields]
            vals.append(float(np.mean(ratios)))
        out[(i, j)] = vals
    return out
