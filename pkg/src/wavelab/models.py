"""Pressure law and capillarity for the rescaled Euler-Korteweg system.

The primitive of the pressure is a quartic polynomial around the constant
state, ``G(1+x) = x**2/2 + a3*x**3 + a4*x**4``, which forces ``g(1) = 0`` and
``g'(1) = 1``.  The capillarity is either constant or ``k0/rho``.

Every evaluation has an ``*_offset`` twin taking ``x = rho - 1`` directly.
Near the transonic limit ``rho - 1`` is O(eps**2), and forming ``1 + x`` first
would throw away digits the energy identities depend on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

K_KINDS = ("constant", "inverse_rho")

# |Gamma| below this is treated as the degenerate branch
GAMMA_ZERO_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters or evaluation outside the model's domain."""


class DegenerateGammaError(ModelError):
    """A gamma-dependent quantity was requested for a Gamma = 0 model."""


class PointValues(NamedTuple):
    g: float
    G: float
    K: float
    dK: float
    g2: float
    g3: float


class Remainders(NamedTuple):
    l: np.ndarray
    l1: np.ndarray
    j: np.ndarray
    h3: np.ndarray


@dataclass(frozen=True)
class FluidModel:
    """Polynomial pressure law plus one of two capillarity families.

    Remainder conventions (all exact for this family):

    * ``G(1+x) = x**2/2 + x**3 * l(x)``
    * ``g(1+x) = x + g''(1) x**2/2 + x**3 * l1(x)``
    * ``K(1+x) = K(1) + x * j(x)``
    * ``K(1) * (1/K(1+x) - 1/K(1)) = x * h3(x)``
    """

    a3: float = 0.0
    a4: float = 0.0
    k_kind: str = "constant"
    k0: float = 1.0

    def __post_init__(self):
        if self.k_kind not in K_KINDS:
            raise ModelError(f"k_kind must be one of {K_KINDS}, got {self.k_kind!r}")
        if not np.isfinite(self.k0) or self.k0 <= 0:
            raise ModelError(f"capillarity K(1) = k0 must be positive, got {self.k0}")
        if not (np.isfinite(self.a3) and np.isfinite(self.a4)):
            raise ModelError("pressure coefficients must be finite")

    # derived constants

    @property
    def K1(self) -> float:
        return float(self.k0)

    @property
    def g2(self) -> float:
        """g''(1)."""
        return 6.0 * self.a3

    @property
    def g3(self) -> float:
        """g'''(1)."""
        return 24.0 * self.a4

    @property
    def Gamma(self) -> float:
        return 3.0 + self.g2

    @property
    def Gamma_prime(self) -> float:
        return self.g3 - 12.0

    @property
    def is_degenerate(self) -> bool:
        return abs(self.Gamma) < GAMMA_ZERO_TOL

    @property
    def gamma(self) -> float:
        if self.is_degenerate:
            raise DegenerateGammaError("gamma = 1/Gamma is undefined: Gamma = 0")
        return 1.0 / self.Gamma

    @property
    def gamma_prime(self) -> float:
        if not self.is_degenerate:
            raise DegenerateGammaError("gamma' is only defined on the Gamma = 0 branch")
        if self.Gamma_prime >= 0:
            raise ModelError(f"Gamma' = g'''(1) - 12 must be negative, got {self.Gamma_prime}")
        return 1.0 / np.sqrt(12.0 - self.g3)

    # evaluation in the offset variable x = rho - 1

    def _check_offset(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= -1.0):
            raise ModelError("density must stay positive (rho = 1 + x > 0)")
        return x

    def g_offset(self, x):
        x = self._check_offset(x)
        return x + 3.0 * self.a3 * x**2 + 4.0 * self.a4 * x**3

    def g_nl_offset(self, x):
        """``g(1+x) - x``, the nonlinear part of the pressure."""
        x = self._check_offset(x)
        return x**2 * (3.0 * self.a3 + 4.0 * self.a4 * x)

    def dg_offset(self, x):
        x = self._check_offset(x)
        return 1.0 + 6.0 * self.a3 * x + 12.0 * self.a4 * x**2

    def dg_nl_offset(self, x):
        """``g'(1+x) - 1``."""
        x = self._check_offset(x)
        return x * (6.0 * self.a3 + 12.0 * self.a4 * x)

    def d2g_offset(self, x):
        x = self._check_offset(x)
        return 6.0 * self.a3 + 24.0 * self.a4 * x

    def G_offset(self, x):
        x = self._check_offset(x)
        return x**2 * (0.5 + x * (self.a3 + self.a4 * x))

    def G_over_x2(self, x):
        """``G(1+x) / x**2``, regular at ``x = 0``."""
        x = self._check_offset(x)
        return 0.5 + x * (self.a3 + self.a4 * x)

    def K_offset(self, x):
        x = self._check_offset(x)
        if self.k_kind == "constant":
            return np.full_like(x, self.k0)
        return self.k0 / (1.0 + x)

    def dK_offset(self, x):
        """K'(rho) at rho = 1 + x; derivatives are with respect to rho."""
        x = self._check_offset(x)
        if self.k_kind == "constant":
            return np.zeros_like(x)
        return -self.k0 / (1.0 + x) ** 2

    def d2K_offset(self, x):
        x = self._check_offset(x)
        if self.k_kind == "constant":
            return np.zeros_like(x)
        return 2.0 * self.k0 / (1.0 + x) ** 3

    def d3K_offset(self, x):
        x = self._check_offset(x)
        if self.k_kind == "constant":
            return np.zeros_like(x)
        return -6.0 * self.k0 / (1.0 + x) ** 4

    def eval(self, rho) -> PointValues:
        """Evaluate g, G, K, K', g'', g''' at a density ``rho > 0``."""
        rho = float(rho)
        if not rho > 0:
            raise ModelError(f"density must be positive, got {rho}")
        x = rho - 1.0
        return PointValues(
            g=float(self.g_offset(x)),
            G=float(self.G_offset(x)),
            K=float(self.K_offset(x)),
            dK=float(self.dK_offset(x)),
            g2=float(self.d2g_offset(x)),
            g3=24.0 * self.a4,
        )

    def taylor_remainders(self, x) -> Remainders:
        """Closed-form Taylor remainders ``l, l1, j, h3`` at offset ``x``."""
        x = self._check_offset(x)
        l = self.a3 + self.a4 * x
        l1 = np.full_like(x, 4.0 * self.a4)
        if self.k_kind == "constant":
            j = np.zeros_like(x)
            h3 = np.zeros_like(x)
        else:
            j = -self.k0 / (1.0 + x)
            h3 = np.ones_like(x)
        return Remainders(l=l, l1=l1, j=j, h3=h3)

    def quartic_remainder(self, x):
        """``l4`` with ``G(1+x) = x**2/2 + g''(1) x**3/6 + x**4 l4(x)``."""
        x = self._check_offset(x)
        return np.full_like(x, self.a4)


def make_polynomial_model(a3: float = 0.0, a4: float = 0.0, k_kind: str = "constant",
                          k0: float = 1.0) -> FluidModel:
    return FluidModel(a3=float(a3), a4=float(a4), k_kind=k_kind, k0=float(k0))
