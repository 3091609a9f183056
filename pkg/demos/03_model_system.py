# %% [markdown]
# The model system x_{n+1} = [I + (beta/n) K(eps n)] x_n
#
# At eps = 0 the product is diagonal with entries prod(1 +- beta/n), so
# N^-beta times it tends to diag(1/Gamma(1 + beta), 0).  For eps != 0 it
# converges, blowing up like |eps|^-beta, and the rescaled one-sided limits
# kill the same vector as the eps = 0 limit.

# %%
import math

import numpy as np

from wvn_spectral import ModelParams, SequenceFamily, product_phi0, product_phi_pm, rank_one_defect
from wvn_spectral.linalg2 import right_singular_vectors2

# %% raw scaled products converge slowly: the (2,2) entry decays like N^(-2 beta)
for beta in (0.25, 0.5, 0.75):
    m = ModelParams(beta)
    raw = product_phi0(m, 10**5, extrapolate=False).matrix
    ext = product_phi0(m, 10**5).matrix
    print(f"beta {beta}: 1/Gamma(1+beta) = {1 / math.gamma(1 + beta):.10f}")
    print(f"   raw    (1,1) {raw[0, 0].real:.10f}  defect {rank_one_defect(raw):.2e}")
    print(f"   extrap (1,1) {ext[0, 0].real:.10f}  defect {rank_one_defect(ext):.2e}")

# %% kernel equality, with and without a summable remainder R_n = 0.5^n G
g = np.array([[0.3, 0.1j], [-0.2, 0.4]])
for rem in (SequenceFamily.zero(), SequenceFamily.geometric(0.5)):
    m = ModelParams(0.5, 0.0, rem, g)
    _, k = right_singular_vectors2(product_phi0(m, 10**5).matrix)
    for side in ("plus", "minus"):
        res = product_phi_pm(m, side, 0.2 * 0.5 ** np.arange(8))
        rel = np.linalg.norm(res.matrix @ k) / np.linalg.svd(res.matrix, compute_uv=False)[0]
        print(f"R = {rem.spec():18s} {side:5s}: |Phi k| / |Phi| = {rel:.2e}")
