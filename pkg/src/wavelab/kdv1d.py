"""One-dimensional Euler-Korteweg solitons near the speed of sound.

Traveling waves solve ``K(rho) rho'' + K'(rho) rho'**2 / 2 = F'(rho)`` with
``F(rho) = -c**2 (rho-1)**2 / (2 rho) + G(rho)`` and ``c = sqrt(1 - eps**2)``.
The orbit starts at the turning point ``(rho_m, 0)`` and is homoclinic to
``rho = 1``.

Everything is computed in the offset ``x = rho - 1``, where the first integral
factors as ``F = x**2 H(x)`` and ``H(0) = eps**2/2 > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .models import DegenerateGammaError, FluidModel

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_STEP_TOL = 1e-12
DEFAULT_DY = 0.01
X_MAX_FACTOR = 40.0
# switch to the stable-manifold reduction once |rho-1| <= HANDOFF*|rho_m-1|
DEFAULT_HANDOFF = 1e-2
CONVERGENCE_EPS_MAX = 0.5


class ProfileError(RuntimeError):
    """A 1D traveling wave could not be constructed."""


class NotTransonicError(ProfileError):
    """No turning point found: eps is outside the transonic regime."""


class BlowUpError(ProfileError):
    pass


class OvershootError(ProfileError):
    """The orbit crossed rho = 1."""


class NonMonotoneError(ProfileError):
    """The orbit turned back before reaching the tail."""


class TailNotReachedError(ProfileError):
    pass


@dataclass(frozen=True)
class WaveParams1D:
    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def eps2(self) -> float:
        return self.eps * self.eps

    @property
    def c(self) -> float:
        return math.sqrt(1.0 - self.eps2)

    @property
    def c2(self) -> float:
        return 1.0 - self.eps2


# first integral and its derivatives, all in x = rho - 1

def reduced_first_integral(model: FluidModel, params: WaveParams1D, x):
    """``H(x) = F(1+x) / x**2``; its roots are the turning points."""
    x = np.asarray(x, dtype=float)
    return (x + params.eps2) / (2.0 * (1.0 + x)) + (model.G_over_x2(x) - 0.5)


def first_integral_offset(model: FluidModel, params: WaveParams1D, x):
    x = np.asarray(x, dtype=float)
    return x * x * reduced_first_integral(model, params, x)


def first_integral(model: FluidModel, params: WaveParams1D, rho):
    """``F_eps(rho) = -c**2 (rho-1)**2 / (2 rho) + G(rho)``."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("density must be positive")
    return first_integral_offset(model, params, rho - 1.0)


def dF_offset(model, params, x):
    """``F'(rho)`` at ``rho = 1 + x``, written without O(1) cancellation."""
    x = np.asarray(x, dtype=float)
    return (x * (x + params.eps2) / (1.0 + x)
            + params.c2 * x * x / (2.0 * (1.0 + x) ** 2)
            + model.g_nl_offset(x))


def _d2F_offset(model, params, x):
    # F'' = 1 - c^2/rho^3 + (g' - 1)
    x = np.asarray(x, dtype=float)
    return ((params.eps2 + x * (3.0 + x * (3.0 + x))) / (1.0 + x) ** 3
            + model.dg_nl_offset(x))


def _d3F_offset(model, params, x):
    x = np.asarray(x, dtype=float)
    return 3.0 * params.c2 / (1.0 + x) ** 4 + model.d2g_offset(x)


def _accel(model, params, x, p):
    """``rho''`` from the traveling-wave ODE."""
    K = model.K_offset(x)
    return (dF_offset(model, params, x) - 0.5 * model.dK_offset(x) * p * p) / K


def _higher_derivatives(model, params, x, p):
    """``rho'''`` and ``rho''''`` by differentiating the ODE along the orbit."""
    K = model.K_offset(x)
    K1 = model.dK_offset(x)
    K2 = model.d2K_offset(x)
    K3 = model.d3K_offset(x)
    F1 = dF_offset(model, params, x)
    F2 = _d2F_offset(model, params, x)
    F3 = _d3F_offset(model, params, x)

    A = (F1 - 0.5 * K1 * p * p) / K
    A_x = (F2 - 0.5 * K2 * p * p) / K - A * K1 / K
    A_p = -K1 * p / K
    A_xx = ((F3 - 0.5 * K3 * p * p) / K - (F2 - 0.5 * K2 * p * p) * K1 / K**2
            - A_x * K1 / K - A * (K2 / K - K1**2 / K**2))
    A_xp = -K2 * p / K - A_p * K1 / K
    A_pp = -K1 / K

    third = A_x * p + A_p * A
    fourth = ((A_xx * p + A_xp * A) * p + A_x * A
              + (A_xp * p + A_pp * A) * A + A_p * third)
    return third, fourth


# turning points

def _nearest_root(H, side: float, scale: float, x_limit: float) -> float:
    """Closest root of ``H`` to 0 on one side, by outward geometric scan."""
    x_prev = side * scale * 1e-3
    if H(x_prev) <= 0:
        raise NotTransonicError("reduced first integral is not positive next to rho = 1")
    while True:
        x_next = x_prev * 1.05
        if abs(x_next) >= x_limit:
            raise NotTransonicError(f"no turning point within |rho - 1| < {x_limit}")
        if H(x_next) <= 0:
            return brentq(H, x_prev, x_next, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
        x_prev = x_next


def find_rho_m(model: FluidModel, params: WaveParams1D) -> float:
    """Turning point of the soliton for a non-degenerate model.

    Tries the asymptotic bracket ``1 - 3 gamma eps**2 +- 2 |gamma| eps**3``
    first and falls back to an outward scan from ``rho = 1``.
    """
    gamma = model.gamma
    eps = params.eps
    H = lambda x: float(reduced_first_integral(model, params, x))
    centre = -3.0 * gamma * eps**2
    half = 2.0 * abs(gamma) * eps**3
    lo, hi = sorted((centre - half, centre + half))
    x_m = None
    # the bracket must not contain rho = 1 itself
    if lo > -1.0 and (hi < 0.0 or lo > 0.0):
        h_lo, h_hi = H(lo), H(hi)
        if h_lo * h_hi < 0:
            x_m = brentq(H, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
            inner = hi if gamma > 0 else lo
            # nearest root only: H must stay positive between the root and 1
            probe = np.linspace(inner, 0.0, 64)[:-1]
            if np.any(reduced_first_integral(model, params, probe) <= 0):
                x_m = None
    if x_m is None:
        side = -1.0 if gamma > 0 else 1.0
        x_m = _nearest_root(H, side, eps**2, 1.0 if side < 0 else 10.0)
    return 1.0 + x_m


def find_rho_m_gamma0(model: FluidModel, params: WaveParams1D, sign: int) -> float:
    """Turning point of the ``rho+`` (sign=+1) or ``rho-`` (sign=-1) branch."""
    if not model.is_degenerate:
        raise DegenerateGammaError("the Gamma = 0 branch requires 3 + g''(1) = 0")
    model.gamma_prime  # validates Gamma' < 0
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    H = lambda x: float(reduced_first_integral(model, params, x))
    x_m = _nearest_root(H, float(sign), params.eps, 1.0 if sign < 0 else 10.0)
    return 1.0 + x_m


# orbit integration

@dataclass
class Profile1D:
    """Half of an even 1D soliton sampled on ``[0, x_end]`` (physical x)."""

    x: np.ndarray
    eta: np.ndarray  # rho - 1, kept separately for precision
    rho_prime: np.ndarray
    rho_second: np.ndarray
    params: WaveParams1D
    model: FluidModel
    rho_m: float
    sign: int = 0
    x_handoff: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def rho(self) -> np.ndarray:
        return 1.0 + self.eta

    @property
    def u(self) -> np.ndarray:
        return self.params.c * self.eta / (1.0 + self.eta)

    @property
    def x_end(self) -> float:
        return float(self.x[-1])

    def conservation_defect(self) -> np.ndarray:
        """``1/2 K(rho) rho'**2 - F(rho)`` at every sample."""
        K = self.model.K_offset(self.eta)
        F = first_integral_offset(self.model, self.params, self.eta)
        return 0.5 * K * self.rho_prime**2 - F

    def derivatives(self, k_max: int) -> list[np.ndarray]:
        """``rho^(k)`` for k = 0..k_max (k = 0 returns the offset ``rho - 1``)."""
        if not 0 <= k_max <= 4:
            raise ValueError("derivative order must be in 0..4")
        out = [self.eta, self.rho_prime, self.rho_second]
        if k_max >= 3:
            out.extend(_higher_derivatives(self.model, self.params, self.eta, self.rho_prime))
        return out[:k_max + 1]


def integrate_profile(model: FluidModel, params: WaveParams1D, *, sign: int | None = None,
                      x_max: float | None = None, tail_tol: float = DEFAULT_TAIL_TOL,
                      step_tol: float = DEFAULT_STEP_TOL, dy: float = DEFAULT_DY,
                      handoff: float = DEFAULT_HANDOFF) -> Profile1D:
    """Integrate the soliton from its turning point until the tail.

    The core is integrated as the second-order ODE with DOP853.  Once
    ``|rho - 1|`` has dropped by ``handoff`` the orbit is continued on the
    zero level set of the first integral, ``x' = -x sqrt(2 H(x) / K)``, which
    is the stable manifold of ``rho = 1``; shooting the second-order ODE into
    the saddle would amplify roundoff like ``exp(eps x)``.

    Samples are taken on a uniform grid of spacing ``dy`` in the rescaled
    variable ``eps x / sqrt(K(1))``.
    """
    if model.is_degenerate:
        if sign is None:
            raise ValueError("sign (+1 or -1) is required on the Gamma = 0 branch")
        rho_m = find_rho_m_gamma0(model, params, sign)
    else:
        rho_m = find_rho_m(model, params)
        sign = 0
    eps = params.eps
    x_max = X_MAX_FACTOR / eps if x_max is None else float(x_max)
    x_m = rho_m - 1.0
    direction = -np.sign(x_m)

    curvature = float(dF_offset(model, params, x_m) / model.K_offset(x_m))
    if not direction * curvature > 0:
        raise ProfileError(f"degenerate turning point: rho''(0) = {curvature:.3e}")

    def rhs(t, y):
        x, p = y
        if x <= -1.0:
            return [p, np.nan]
        return [p, float(_accel(model, params, x, p))]

    def ev_handoff(t, y):
        return abs(y[0]) - handoff * abs(x_m)
    ev_handoff.terminal = True

    def ev_cross(t, y):
        return y[0]
    ev_cross.terminal = True

    def ev_turn(t, y):
        return y[1]
    ev_turn.terminal = True
    ev_turn.direction = -direction

    def ev_blow(t, y):
        return 0.99 - abs(y[0])
    ev_blow.terminal = True

    core = solve_ivp(rhs, (0.0, x_max), [x_m, 0.0], method="DOP853", rtol=step_tol,
                     atol=step_tol * abs(x_m) * 1e-2, dense_output=True,
                     events=[ev_handoff, ev_cross, ev_turn, ev_blow])
    if core.status < 0 or not np.all(np.isfinite(core.y)):
        raise BlowUpError(f"core integration failed: {core.message}")
    if core.t_events[3].size:
        raise BlowUpError(f"|rho - 1| reached 0.99 at x = {core.t_events[3][0]:.6g}")
    if core.t_events[1].size:
        raise OvershootError(f"orbit crossed rho = 1 at x = {core.t_events[1][0]:.6g}")
    if core.t_events[2].size:
        raise NonMonotoneError(f"rho' changed sign at x = {core.t_events[2][0]:.6g}")
    if not core.t_events[0].size:
        raise TailNotReachedError(f"core phase did not decay within x_max = {x_max:.6g}")
    x_h = float(core.t[-1])

    def slope(x):
        H = reduced_first_integral(model, params, x)
        return -x * np.sqrt(np.maximum(2.0 * H, 0.0) / model.K_offset(x))

    def rhs_tail(t, y):
        return [float(slope(y[0]))]

    def ev_tail(t, y):
        return abs(y[0]) - tail_tol
    ev_tail.terminal = True

    tail = solve_ivp(rhs_tail, (x_h, x_max), [core.y[0, -1]], method="DOP853", rtol=step_tol,
                     atol=tail_tol * 1e-6, dense_output=True, events=[ev_tail])
    if tail.status < 0:
        raise BlowUpError(f"tail integration failed: {tail.message}")
    if not tail.t_events[0].size:
        raise TailNotReachedError(
            f"|rho - 1| = {abs(tail.y[0, -1]):.3e} > tail_tol at x_max = {x_max:.6g}")
    x_end = float(tail.t[-1])

    scale = math.sqrt(model.K1) / eps  # physical x per rescaled unit
    # the last sample is the first grid point at or past the tail event, so
    # the sampled profile itself ends below tail_tol
    n = int(math.ceil(x_end / scale / dy)) + 1
    xs = np.arange(n) * dy * scale
    eta = np.empty_like(xs)
    rp = np.empty_like(xs)
    in_core = xs <= x_h
    eta[in_core], rp[in_core] = core.sol(xs[in_core])
    eta[~in_core] = tail.sol(xs[~in_core])[0]
    rp[~in_core] = slope(eta[~in_core])
    eta[0], rp[0] = x_m, 0.0
    rs = _accel(model, params, eta, rp)

    steps = np.diff(eta) * direction
    if np.any(steps < -tail_tol):
        raise NonMonotoneError("sampled profile is not monotone")

    prof = Profile1D(x=xs, eta=eta, rho_prime=rp, rho_second=rs, params=params, model=model,
                     rho_m=rho_m, sign=sign, x_handoff=x_h)
    prof.info = {
        "x_end": x_end,
        "core_steps": int(core.t.size),
        "tail_steps": int(tail.t.size),
        "max_conservation_defect": float(np.max(np.abs(prof.conservation_defect()))),
    }
    return prof


def phase_portrait(profile: Profile1D) -> tuple[np.ndarray, np.ndarray]:
    """Full even orbit in the ``(rho, rho')`` plane."""
    rho = np.concatenate([profile.rho[:0:-1], profile.rho])
    rp = np.concatenate([-profile.rho_prime[:0:-1], profile.rho_prime])
    return rho, rp


# rescaling and limits

@dataclass
class RescaledProfile:
    y: np.ndarray
    derivs: list  # r, r', r'', ... on y
    kind: str

    @property
    def r(self) -> np.ndarray:
        return self.derivs[0]


def rescale_to_r(profile: Profile1D, k_max: int = 0) -> RescaledProfile:
    """Map a profile to the KdV (or mKdV) scaling variable.

    ``rho - 1 = -eps**2 gamma r(eps x / sqrt(K(1)))`` when Gamma != 0 and
    ``rho - 1 = eps gamma' r(...)`` on the Gamma = 0 branch.
    """
    model, eps = profile.model, profile.params.eps
    dxdy = math.sqrt(model.K1) / eps
    if model.is_degenerate:
        amp = eps * model.gamma_prime
        kind = "mkdv_plus" if profile.sign > 0 else "mkdv_minus"
    else:
        amp = -eps**2 * model.gamma
        kind = "kdv"
    derivs = [d * dxdy**k / amp for k, d in enumerate(profile.derivatives(k_max))]
    return RescaledProfile(y=profile.x / dxdy, derivs=derivs, kind=kind)


def _sech_power_derivatives(power: float, k_max: int):
    """Derivatives of ``sech(u)**power`` as sums of ``coef * sech**a * tanh**b``."""
    terms = {(power, 0): 1.0}
    out = [dict(terms)]
    for _ in range(k_max):
        new: dict = {}
        for (a, b), coef in terms.items():
            # d/du sech^a tanh^b = -a sech^a tanh^(b+1) + b sech^(a+2) tanh^(b-1)
            if a:
                new[(a, b + 1)] = new.get((a, b + 1), 0.0) - a * coef
            if b:
                new[(a + 2, b - 1)] = new.get((a + 2, b - 1), 0.0) + b * coef
        terms = new
        out.append(dict(terms))
    return out


REFERENCE_KINDS = ("kdv", "mkdv_plus", "mkdv_minus")


def reference_soliton(kind: str, y, order: int = 0):
    """Closed-form limit profiles and their derivatives (order 0..4).

    ``kdv``: ``3 / cosh(y/2)**2``;  ``mkdv_plus/minus``: ``+-sqrt(12) / cosh(y)``.
    """
    if kind not in REFERENCE_KINDS:
        raise ValueError(f"kind must be one of {REFERENCE_KINDS}")
    if not 0 <= order <= 4:
        raise ValueError("order must be in 0..4")
    y = np.asarray(y, dtype=float)
    if kind == "kdv":
        amp, power, rate = 3.0, 2, 0.5
    else:
        amp, power, rate = (1.0 if kind == "mkdv_plus" else -1.0) * math.sqrt(12.0), 1, 1.0
    u = rate * y
    sech = 1.0 / np.cosh(u)
    tanh = np.tanh(u)
    terms = _sech_power_derivatives(power, order)[order]
    total = np.zeros_like(u)
    for (a, b), coef in terms.items():
        total = total + coef * sech**a * tanh**b
    return amp * rate**order * total


# ladders

@dataclass
class LadderRow:
    eps: float
    k: int
    sup_error: float


@dataclass
class ConvergenceReport:
    kind: str
    rows: list
    monotone: dict  # k -> bool, strictly decreasing in descending eps
    r0: dict  # eps -> r(0)
    profiles: dict = field(default_factory=dict, repr=False)

    def errors(self, k: int) -> np.ndarray:
        return np.array([row.sup_error for row in self.rows if row.k == k])


def sup_errors(rescaled: RescaledProfile, k_max: int, tail_span: float = 40.0) -> list[float]:
    """Sup over the half line of ``|r^(k) - N^(k)|``.

    Beyond the last sample ``r`` is below the tail tolerance, so the error
    there is bounded by the reference profile's own tail.
    """
    y_end = rescaled.y[-1]
    y_tail = y_end + np.linspace(0.0, tail_span, 4001)
    out = []
    for k in range(k_max + 1):
        core = np.max(np.abs(rescaled.derivs[k] - reference_soliton(rescaled.kind, rescaled.y, k)))
        beyond = np.max(np.abs(reference_soliton(rescaled.kind, y_tail, k)))
        out.append(float(max(core, beyond)))
    return out


def strictly_decreasing(values: Sequence[float]) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


def convergence_report(model: FluidModel, eps_ladder: Sequence[float], k_max: int = 2, *,
                       sign: int = 1, keep_profiles: bool = False,
                       **profile_opts) -> ConvergenceReport:
    """Sup-norm distance to the limit soliton along a ladder of eps.

    The ladder is processed in descending eps; ``monotone[k]`` records
    whether the error for derivative order k strictly decreases.
    """
    ladder = sorted((float(e) for e in eps_ladder), reverse=True)
    rows, r0, profiles = [], {}, {}
    kind = None
    for eps in ladder:
        try:
            prof = integrate_profile(model, WaveParams1D(eps), sign=sign, **profile_opts)
        except ProfileError as exc:
            raise type(exc)(f"eps = {eps}: {exc}") from exc
        resc = rescale_to_r(prof, k_max)
        kind = resc.kind
        for k, err in enumerate(sup_errors(resc, k_max)):
            rows.append(LadderRow(eps=eps, k=k, sup_error=err))
        r0[eps] = float(resc.r[0])
        if keep_profiles:
            profiles[eps] = prof
    monotone = {k: strictly_decreasing([r.sup_error for r in rows if r.k == k])
                for k in range(k_max + 1)}
    return ConvergenceReport(kind=kind, rows=rows, monotone=monotone, r0=r0, profiles=profiles)
