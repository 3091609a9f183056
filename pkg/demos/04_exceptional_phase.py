# %% [markdown]
# Exceptional phases: half-bound states and embedded eigenvalues
#
# For generic delta the polynomials at nu pick up the growing solution
# n^beta cos(omega n + delta/2).  Sweeping delta over one period flips the
# sign of that component, so some delta removes it.  What is left decays
# like n^-beta: square-summable (an eigenvalue) iff beta > 1/2.

# %%
import math

import numpy as np

from wvn_spectral import (
    CriticalPoint,
    PotentialParams,
    classify_critical_point,
    find_exceptional_delta,
    gev_exponent_fit,
    orthogonal_polynomials,
)

# %%
for c in (1.0, 3.0):
    p = PotentialParams(c, math.pi / 4)
    cp = CriticalPoint.for_params(p, "plus")
    g = gev_exponent_fit(p, cp, 10**6)
    print(f"c = {c}: beta = {p.beta:.4f}, fitted growth {g.exponent_plus:+.4f} / {g.exponent_minus:+.4f}")
    print("   delta = 0:", classify_critical_point(p, cp).kind)
    d = find_exceptional_delta(p, cp)
    q = PotentialParams(c, math.pi / 4, d)
    res = classify_critical_point(q, cp)
    P = orthogonal_polynomials(q, cp.nu, 10**5)
    S = np.cumsum(P**2)
    print(f"   delta = {d:.6f}: {res.kind} (scaled limit {res.scaled_limit:.2e})")
    print(f"   sum P_n^2 up to 1e3, 1e4, 1e5: {S[999]:.4f} {S[9999]:.4f} {S[-1]:.4f}")
