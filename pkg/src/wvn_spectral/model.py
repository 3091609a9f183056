"""Products of the model-system steps.

    B_n(eps) = I + (beta/n) K(eps n) + R_n,    K(t) = [[cos t, sin t], [sin t, -cos t]]

``x_{n+1} = B_n x_n``, so the product over ``n = 1..N`` is ordered with the
newest factor on the left: ``B_N ... B_2 B_1``.  The remainder is
``R_n = s_n G`` for a fixed complex matrix ``G`` and a summable scalar profile
``s_n`` taken from :class:`~wvn_spectral.sequences.SequenceFamily`.

For ``eps != 0`` the product converges; at ``eps = 0`` it grows like
``N^beta`` and ``N^{-beta} prod`` tends to a rank-one matrix; and
``|eps|^beta prod(eps)`` has one-sided limits as ``eps -> +-0`` sharing the
kernel of the ``eps = 0`` limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import DomainError, ParameterError
from .linalg2 import I2, det2, fro2, rot_refl, singular_values2
from .sequences import SequenceFamily

__all__ = [
    "ModelParams",
    "ProductResult",
    "model_step",
    "chain_product",
    "product_phi",
    "product_phi0",
    "product_phi_pm",
    "rank_one_defect",
    "model_n_min",
]

_CHUNK = 1 << 18


@dataclass(frozen=True)
class ModelParams:
    beta: float
    epsilon: float = 0.0
    remainder: SequenceFamily = field(default_factory=SequenceFamily.zero)
    remainder_matrix: tuple = ((0j, 0j), (0j, 0j))

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if not abs(self.epsilon) < 2 * math.pi:
            raise ParameterError("epsilon must lie in (-2 pi, 2 pi)")
        g = np.asarray(self.remainder_matrix, dtype=complex)
        if g.shape != (2, 2):
            raise ParameterError("remainder_matrix must be 2x2")
        object.__setattr__(self, "remainder_matrix", tuple(map(tuple, g.tolist())))
        self._check_invertible()

    @property
    def G(self) -> np.ndarray:
        return np.asarray(self.remainder_matrix, dtype=complex)

    @property
    def has_remainder(self) -> bool:
        return not self.remainder.is_zero and bool(np.any(self.G != 0))

    def at(self, epsilon: float) -> "ModelParams":
        return replace(self, epsilon=float(epsilon))

    def remainder_bound(self, start: int, stop: int) -> np.ndarray:
        """``r_n = |s_n| |G|_F >= |R_n|`` for ``n = start..stop-1``."""
        return np.abs(self.remainder.window(start, stop)) * float(np.linalg.norm(self.G))

    def _check_invertible(self):
        # past n_safe every step is within distance < 1 of I, hence invertible
        gn = float(np.linalg.norm(self.G))
        n_safe = int(math.ceil(2 * self.beta)) + 1
        if self.has_remainder:
            while n_safe < 1 << 22 and (
                self.beta / n_safe + gn * self.remainder.tail_l1(n_safe) >= 0.5
            ):
                n_safe *= 2
        n = np.arange(1, n_safe + 1)
        d = det2(_steps(self, n))
        bad = np.flatnonzero(np.abs(d) < 1e-13)
        if bad.size:
            raise ParameterError(
                f"B_n(eps) is singular at n = {int(n[bad[0]])}; the model system needs invertible steps"
            )


@dataclass(frozen=True)
class ProductResult:
    matrix: np.ndarray
    n_terms: int
    convergence_estimate: float
    warnings: tuple = ()
    history: tuple = ()


def _steps(m: ModelParams, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    out = I2 + (m.beta / n)[..., None, None] * rot_refl(m.epsilon * n)
    if m.has_remainder:
        s = m.remainder.window(int(n.min()), int(n.max()) + 1)[(n - n.min()).astype(int)]
        out = out + s[..., None, None] * m.G
    return out


def model_step(m: ModelParams, n) -> np.ndarray:
    """``B_n(eps)``; ``n`` may be an array."""
    n_arr = np.atleast_1d(np.asarray(n))
    if np.any(n_arr < 1):
        raise DomainError("model steps are indexed from n = 1")
    out = _steps(m, n_arr)
    return out[0] if np.ndim(n) == 0 else out


def chain_product(m: ModelParams, n_start: int, n_stop: int, init: np.ndarray | None = None) -> np.ndarray:
    """``B_{n_stop-1} ... B_{n_start} @ init``."""
    p = I2.copy() if init is None else np.array(init, dtype=complex)
    g = m.G
    end = m.remainder.support_end() if m.has_remainder else 1
    empty = np.zeros(0)
    for a in range(n_start, n_stop, _CHUNK):
        b = min(n_stop, a + _CHUNK)
        s = m.remainder.window(a, b) if (end is None or a < end) else empty
        p = _kernels.model_chain(p, m.beta, m.epsilon, a, b, s, g)
    return p


def product_phi(m: ModelParams, N: int) -> ProductResult:
    """Truncated infinite product ``B_N ... B_1`` for ``eps != 0``.

    ``convergence_estimate`` is ``|prod_N - prod_{N/2}|_F``.
    """
    if m.epsilon == 0.0:
        raise DomainError("eps = 0: the product diverges; use product_phi0")
    if N < 2:
        raise DomainError("need N >= 2")
    half = N // 2
    p_half = chain_product(m, 1, half + 1)
    p_full = chain_product(m, half + 1, N + 1, p_half)
    return ProductResult(p_full, N, float(fro2(p_full - p_half)))


def _richardson(values: list[np.ndarray], orders: list[float]) -> np.ndarray:
    """Successive Richardson elimination on values at ``N/2^k, ..., N/2, N``."""
    vals = list(values)
    for a in orders:
        f = 2.0**a
        vals = [(f * hi - lo) / (f - 1.0) for lo, hi in zip(vals[:-1], vals[1:])]
    return vals[-1]


def product_phi0(m: ModelParams, N: int, extrapolate: bool = True) -> ProductResult:
    """Scaled product ``N^{-beta} B_N(0) ... B_1(0)``.

    With ``extrapolate`` the returned matrix is the ``N -> infinity`` limit
    estimated from the scaled products at ``N/8, N/4, N/2, N`` by Richardson
    elimination of the ``N^{-2 beta}`` (subdominant solution) and ``N^{-1}``
    corrections.  ``convergence_estimate`` is then the change between the
    extrapolations ending at ``N/2`` and ``N``; without it, the change of the
    raw scaled product between ``N/2`` and ``N``.
    """
    if m.epsilon != 0.0:
        raise DomainError("product_phi0 needs eps = 0")
    if N < 16:
        raise DomainError("need N >= 16")
    marks = [N // 8, N // 4, N // 2, N]
    scaled = []
    p = I2.copy()
    prev = 1
    for k in marks:
        p = chain_product(m, prev, k + 1, p)
        prev = k + 1
        scaled.append(p / float(k) ** m.beta)
    if not extrapolate:
        return ProductResult(scaled[-1], N, float(fro2(scaled[-1] - scaled[-2])))
    a = 2 * m.beta
    orders = [1.0, 2.0] if abs(a - 1.0) < 1e-6 else sorted({1.0, a})
    est = _richardson(scaled[1:], orders)
    est_prev = _richardson(scaled[:-1], orders)
    return ProductResult(est, N, float(fro2(est - est_prev)), history=tuple(scaled))


def model_n_min(eps: float, factor: float = 4000.0) -> int:
    """Run length ``ceil(factor / |eps|)``; matches ``2000 / |phi - center|`` for ``eps = 2 (phi - center)``."""
    if eps == 0:
        raise DomainError("eps = 0 has no finite run length")
    return int(math.ceil(factor / abs(eps)))


def product_phi_pm(m: ModelParams, side: str, eps_sequence, n_rule=model_n_min) -> ProductResult:
    """One-sided limit ``lim_{eps -> +-0} |eps|^beta prod(eps)``.

    Evaluates the scaled products along the decreasing positive sequence
    (``side`` picks the sign of ``eps``) and extrapolates the last three
    values assuming a geometric approach, i.e. Richardson with the rate
    estimated from the data.
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    eps = np.asarray(list(eps_sequence), dtype=float)
    if eps.size < 3:
        raise DomainError("need at least three eps values")
    if np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise DomainError("eps_sequence must be positive and strictly decreasing")
    sign = 1.0 if side == "plus" else -1.0
    vals = []
    n_total = 0
    for e in eps:
        N = n_rule(e)
        res = product_phi(m.at(sign * e), N)
        n_total += N
        vals.append(e**m.beta * res.matrix)
    diffs = [float(fro2(b - a)) for a, b in zip(vals[:-1], vals[1:])]
    warnings = []
    if any(d2 > d1 for d1, d2 in zip(diffs[:-1], diffs[1:])):
        warnings.append("non-monotone spread along the eps sequence")
    f1, f2, f3 = vals[-3:]
    d1, d2 = diffs[-2], diffs[-1]
    r = d2 / d1 if d1 > 0 else 0.0
    if 0.0 < r < 1.0:
        limit = f3 + (f3 - f2) * (r / (1.0 - r))
    else:
        limit = f3
        warnings.append(f"extrapolation skipped (ratio {r:.3g})")
    history = tuple(zip(eps.tolist(), vals))
    return ProductResult(limit, n_total, d2, tuple(warnings), history)


def rank_one_defect(a: np.ndarray) -> float:
    """``sigma_2 / sigma_1``; zero for the zero matrix."""
    s1, s2 = singular_values2(np.asarray(a, dtype=complex))
    s1, s2 = float(s1), float(s2)
    return 0.0 if s1 == 0.0 else s2 / s1
