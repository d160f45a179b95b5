# %% [markdown]
# # One-dimensional transonic solitons
#
# A traveling wave of speed c < 1 leaves the sound speed behind, and its
# density dip shrinks as c approaches 1.  Rescaled by eps = sqrt(1 - c**2),
# the dip approaches the KdV soliton 3 / cosh(y/2)**2 when Gamma != 0 and one
# of the mKdV profiles +-sqrt(12) / cosh(y) when Gamma vanishes.

# %%
import math

import numpy as np

from wavelab import make_polynomial_model
from wavelab.kdv1d import (WaveParams1D, convergence_report, integrate_profile, phase_portrait,
                           reference_soliton, rescale_to_r)

quadratic = make_polynomial_model()          # g(rho) = rho - 1, K = 1, Gamma = 3
degenerate = make_polynomial_model(-0.5)     # g''(1) = -3, so Gamma = 0
print("Gamma:", quadratic.Gamma, degenerate.Gamma)

# %% [markdown]
# ## A single profile far from the limit
#
# At eps = 0.82 the wave is slow and deep.  The orbit is a closed loop in
# the (rho, rho') plane that leaves the sonic state rho = 1 and turns back
# at rho_m.

# %%
prof = integrate_profile(quadratic, WaveParams1D(0.82))
rho, rp = phase_portrait(prof)
print(f"rho_m = {prof.rho[0]:.6f}, samples = {prof.x.size}, x_end = {prof.x_end:.2f}")
print(f"max |rho'| on orbit = {np.max(np.abs(rp)):.4f}")
print(f"first integral drift = {np.max(np.abs(prof.conservation_defect())):.2e}")

# %% [markdown]
# ## Convergence to KdV
#
# The ladder eps in {0.4, 0.2, 0.1, 0.05} should shrink the sup distance to
# the soliton by roughly four per halving, both for the profile and its
# first two derivatives.

# %%
ladder = [0.4, 0.2, 0.1, 0.05]
rep = convergence_report(quadratic, ladder, k_max=2)
print(" eps      k=0        k=1        k=2       r(0)")
for i, eps in enumerate(sorted(rep.r0, reverse=True)):
    print(f"{eps:5.2f}  " + "  ".join(f"{rep.errors(k)[i]:.3e}" for k in range(3)) + f"   {rep.r0[eps]:.4f}")
print("rates:", np.round(rep.errors(0)[:-1] / rep.errors(0)[1:], 2))

# %% [markdown]
# ## The degenerate branch
#
# With Gamma = 0 both signs of the dip exist.  Here eps = 0.5 is a moderate
# case, and the ladder shows both branches approaching +-sqrt(12)/cosh.

# %%
for sign in (1, -1):
    p = integrate_profile(degenerate, WaveParams1D(0.5), sign=sign)
    r = rescale_to_r(p)
    print(f"sign {sign:+d}: rho(0) = {p.rho[0]:.5f}, r(0) = {r.r[0]:+.4f}")

for sign in (1, -1):
    rep = convergence_report(degenerate, ladder, k_max=0, sign=sign)
    print(f"sign {sign:+d}:", np.array2string(rep.errors(0), precision=4),
          f" r(0) at eps=0.05: {rep.r0[0.05]:+.6f} (limit {sign * math.sqrt(12):+.6f})")

# %% [markdown]
# The reference profiles come in closed form, derivatives included.

# %%
y = np.linspace(0, 4, 5)
print(reference_soliton("kdv", y))
print(reference_soliton("mkdv_plus", y, order=1))
