"""Spectral analysis of Jacobi matrices with a Wigner-von Neumann diagonal.

The operator has unit off-diagonal entries and diagonal
``b_n = c sin(2 omega n + delta) / n + q_n`` with ``q`` summable.  Its
spectral density vanishes at the two resonance points ``+-2 cos(omega)``
like ``|lam - nu|^(|c| / (2 |sin omega|))``; this package computes the
density and the exponents numerically.
"""

from .core import (
    PotentialParams,
    SpectralPoint,
    generalized_eigenvector,
    lambda_to_point,
    orthogonal_polynomials,
    phi_to_point,
    potential,
    potential_value,
    recurrence_matrix,
    to_v,
    transfer_matrix,
    transfer_matrix_parts,
    vop_inverse,
    vop_matrix,
)
from .errors import ConvergenceError, DomainError, ParameterError
from .harris_lutz import (
    CriticalNeighborhood,
    LimitEstimate,
    ReducedSystemStep,
    basis_change,
    harris_lutz_T,
    harris_lutz_T_range,
    n_min,
    oscillatory_tail,
    p_hat,
    p_hat_infinity,
    p_hat_sequence,
    reduced_step,
    remainder_norms,
    side_of,
    tail_sum_bound,
)
from .model import (
    ModelParams,
    ProductResult,
    chain_product,
    model_n_min,
    model_step,
    product_phi,
    product_phi0,
    product_phi_pm,
    rank_one_defect,
)
from .sequences import SequenceFamily
from .spectral import (
    Classification,
    CriticalPoint,
    DensityPoint,
    DensityScan,
    GevFit,
    PowerLawFit,
    amplitude_oracle_density,
    classify_critical_point,
    critical_points,
    default_eps_grid,
    density_scan,
    find_exceptional_delta,
    gev_exponent_fit,
    pseudogap_fit,
    spectral_density,
)

__version__ = "0.1.0"
