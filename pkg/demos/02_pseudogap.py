# %% [markdown]
# Pseudogaps at the resonance points +-2 cos(omega)
#
# b_n = sin(2 omega n)/n with omega = pi/4.  The density vanishes at
# lam = +-sqrt(2) like |lam - nu|^(|c| / (2 |sin omega|)) = |lam - nu|^0.7071.

# %%
import math

import numpy as np

from wvn_spectral import PotentialParams, critical_points, density_scan, pseudogap_fit, spectral_density

p = PotentialParams(1.0, math.pi / 4)
plus, minus = critical_points(p)
print("critical points:", plus.nu, minus.nu, "predicted exponent:", plus.predicted_exponent)

# %% a coarse scan across the band; the dips sit at +-1.414
scan = density_scan(p, -1.95, 1.95, 27)
for g in scan.grid:
    bar = "#" * int(60 * g.rho_prime) if g.rho_prime == g.rho_prime else "(flagged)"
    print(f"{g.lam:7.3f} {g.rho_prime:8.5f} {bar}")

# %% [markdown]
# Local slopes of log rho' against log|lam - nu| on a finer eps-grid.
# On the minus side they sit at the prediction from the start; on the plus
# side they creep in from one side, with a relative correction that shrinks
# like eps^(2 beta).

# %%
for cp in (plus, minus):
    for side, sgn in (("left", 1.0), ("right", -1.0)):
        eps = 0.2 * 0.5 ** np.arange(10)
        lam = 2 * np.cos(cp.side_phi + sgn * eps / 2)
        rho = np.array([spectral_density(p, x, N=int(4000 / e) + 1)[0] for x, e in zip(lam, eps)])
        slopes = np.diff(np.log(rho)) / np.diff(np.log(np.abs(lam - cp.nu)))
        print(f"{cp.side:5s} {side:5s}", np.round(slopes, 3))

# %% the packaged fit on the default grid 0.2 * 2^-k, k = 0..7
for cp in (plus, minus):
    for side in ("left", "right"):
        f = pseudogap_fit(p, cp, side)
        print(f"{cp.nu:+.4f} {side:5s} exponent {f.exponent:.4f}  prefactor {f.prefactor:.4f}  rms {f.residual_rms:.3g}")
