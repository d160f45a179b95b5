# %% [markdown]
# # From the lump to a two-dimensional traveling wave
#
# Scaling the KP-I lump back into physical variables gives an approximate
# Euler-Korteweg traveling wave.  Its energy and momentum inherit the lump's
# mass and KP energy, and its defects shrink as the speed approaches one.

# %%
import numpy as np

from wavelab import make_polynomial_model
from wavelab.kp2d import energy_kp, petviashvili_solve
from wavelab.reconstruct2d import (build_wave_from_lump, convolution_identity_residual, energy_decomposition,
                                   energy_gap_ratio, physical_energy_momentum, pohozaev_residuals)
from wavelab.spectral import GridSpec2D

model = make_polynomial_model()
state = petviashvili_solve(GridSpec2D(64.0, 64.0, 512, 512))
ekp = energy_kp(state.omega)
print(f"mu = {state.mu:.4f}, E_KP = {ekp:.4f}")

# %% [markdown]
# The gap (E - P) / (K(1) gamma**2 eps**3) should approach E_KP at rate
# eps**2, and the Pohozaev defects and convolution residual should all shrink.

# %%
print("  eps        E          P       gap/E_KP    D1        D2        D3      conv")
for eps in (0.2, 0.1, 0.05):
    w = build_wave_from_lump(state, eps, model)
    E, P = physical_energy_momentum(w)
    d = pohozaev_residuals(w)
    print(f"{eps:5.2f}  {E:.5e}  {P:.5e}  {energy_gap_ratio(w) / ekp:.5f}  "
          f"{d.D1:.2e}  {d.D2:.2e}  {d.D3:.2e}  {convolution_identity_residual(w):.2e}")

# %% [markdown]
# The energy splits as (K(1) gamma**2 / 2)(eps E0 + eps**3 E2 + eps**5 E4)
# with E0 = 2 mu and E2 = 2 E_KP exactly.

# %%
dec = energy_decomposition(build_wave_from_lump(state, 0.1, model))
print(dec)
print(f"E0 / 2mu = {dec.E0 / (2 * state.mu):.15f}, E2 / 2E_KP = {dec.E2 / (2 * ekp):.15f}")
