# %% [markdown]
# Free operator: both density routes against the closed form
#
# With c = 0 and q = 0 the polynomials are Chebyshev, P_n = sin(n phi)/sin(phi),
# and the density is sqrt(4 - lam^2) / (2 pi).

# %%
import math

import numpy as np

from wvn_spectral import PotentialParams, amplitude_oracle_density, orthogonal_polynomials, spectral_density

p = PotentialParams.free()

# %%
print(f"{'lambda':>8} {'closed form':>12} {'p-hat route':>12} {'amplitude':>12}")
for lam in np.linspace(-1.9, 1.9, 9):
    exact = math.sqrt(4 - lam * lam) / (2 * math.pi)
    rho, _ = spectral_density(p, lam)
    amp = amplitude_oracle_density(p, lam)
    print(f"{lam:8.3f} {exact:12.8f} {rho:12.8f} {amp:12.8f}")

# %% [markdown]
# The amplitude can also be read off as (max - min)/2 of P_n.  At
# lam = 1 (phi = pi/3) the samples repeat with period 6 and never hit the
# crest, so that reading is 13% low in amplitude, 33% high in density.

# %%
P = orthogonal_polynomials(p, 1.0, 24)
print(np.round(P, 3))
print("lsq     :", amplitude_oracle_density(p, 1.0))
print("extrema :", amplitude_oracle_density(p, 1.0, method="extrema"))
