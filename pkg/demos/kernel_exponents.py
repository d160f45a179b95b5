# %% [markdown]
# # Anisotropic kernels
#
# K^{i,j}_eps has symbol xi1**i xi2**j / Q_eps with
# Q_eps = |xi|**2 + xi1**4 + 2 eps**2 xi1**2 xi2**2 + eps**4 xi2**4.  As eps
# goes to zero the xi2 direction loses its quartic damping.  K^{2,0} stays
# bounded while K^{1,1} and K^{0,2} grow like eps**(-1/2) and eps**(-3/2).

# %%
import numpy as np

from wavelab.kernels import (CONVOLUTION_PAIRS, KernelSpec, combination_norm, fit_loglog_slope,
                             inversion_identity_check, kernel_sobolev_norm, lizorkin_constant,
                             operator_norm_probe)
from wavelab.spectral import Field2D, GridSpec2D

ladder = [0.4, 0.2, 0.1, 0.05]
for i, j in CONVOLUTION_PAIRS:
    norms = [kernel_sobolev_norm(KernelSpec(i, j, e), 0.0) for e in ladder]
    print(f"K^({i},{j}):", np.array2string(np.array(norms), precision=4),
          f" slope {fit_loglog_slope(ladder, norms):+.3f}")

# %% [markdown]
# The eps weights in the combination exactly compensate the blow-up, so the
# weighted sum stays bounded.

# %%
for s in (0.0, 0.25):
    vals = [combination_norm(e, s) for e in ladder]
    print(f"s={s}:", np.array2string(np.array(vals), precision=4), f" max/min {max(vals) / min(vals):.3f}")

# %% [markdown]
# ## Multiplier bounds and a white-noise probe

# %%
for eps in (0.4, 0.2, 0.1):
    M = [lizorkin_constant(KernelSpec(i, j, eps))[0] for i, j in CONVOLUTION_PAIRS]
    print(f"eps={eps}: Lizorkin constants", np.round(M, 4))

grid = GridSpec2D(40.0, 40.0, 128, 128)
probe = operator_norm_probe(CONVOLUTION_PAIRS, ladder, grid, seed=0)
for pair, vals in probe.items():
    print(pair, np.array2string(np.array(vals), precision=4))

# %% [markdown]
# ## Inverting the operator
#
# Applying K^{i,j} to L u returns -d1^i d2^j u up to roundoff.

# %%
X1, X2 = grid.mesh()
u = Field2D(np.exp(-(X1**2 + X2**2) / 3), grid)
for eps in (0.0, 0.3):
    worst, per = inversion_identity_check(u, eps)
    print(f"eps={eps}: worst {worst:.1e}")
