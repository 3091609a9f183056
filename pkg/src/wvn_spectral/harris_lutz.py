"""Harris-Lutz reduction of the transfer-matrix system near a critical point.

Near ``phi = omega1`` (side ``"plus"``) or ``phi = pi - omega1`` (side
``"minus"``) the step ``M_n(phi)`` carries one slowly rotating ``1/n`` term
that resonates and a handful of fast ``e^{i k xi}/k`` terms that do not.  The
transformation

    T_n(phi) = sum_{k >= n} t_k(phi)

absorbs the fast terms: ``exp(-T_{n+1}) M_n exp(T_n)`` is ``I`` plus the
resonant term plus an ``O(1/n^2)`` remainder.  After a constant change of
basis ``G`` the resonant term becomes ``beta/n K(eps n)``, with ``K`` the
rotation-reflection matrix, ``beta = |c| / (4 sin omega1)`` and
``eps = 2 (phi - center)``, i.e. exactly the model system of
:mod:`wvn_spectral.model`.

The tails ``sum_{k>=n} e^{i k xi}/k`` are evaluated with a certified error:
explicit summation up to a cutoff ``K`` followed by an ``m``-fold
summation-by-parts expansion whose remainder is bounded by
``(m-1)! / (|1 - e^{i xi}|^m K (K+1) ... (K+m-1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import PotentialParams, orthogonal_polynomials, to_v, transfer_matrix
from .errors import ConvergenceError, DomainError
from .linalg2 import C_SIM_INV, I2, expm2, mat2, offdiag_phase, rot_refl

SIDES = ("plus", "minus")

_EPS = np.finfo(float).eps
_M_MAX = 24
_K_MAX = 1 << 24
_CHUNK = 1 << 20


# -- neighbourhoods --------------------------------------------------------

@dataclass(frozen=True)
class CriticalNeighborhood:
    side: str
    center: float
    halfwidth: float

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        if not self.halfwidth > 0:
            raise ValueError("halfwidth must be positive")
        lo, hi = self.interval
        if lo <= 0.0 or hi >= math.pi:
            raise ValueError("neighbourhood must lie inside (0, pi)")

    @classmethod
    def for_params(cls, p: PotentialParams, side: str, halfwidth: float | None = None):
        p.require_resonance()
        w1 = p.omega1
        center = w1 if side == "plus" else math.pi - w1
        if halfwidth is None:
            halfwidth = default_halfwidth(p)
        other = math.pi - center
        if abs(other - center) <= halfwidth:
            raise ValueError("neighbourhood would contain the opposite critical point")
        return cls(side, center, halfwidth)

    @property
    def interval(self) -> tuple[float, float]:
        return self.center - self.halfwidth, self.center + self.halfwidth

    def contains(self, phi: float) -> bool:
        return abs(phi - self.center) < self.halfwidth


def default_halfwidth(p: PotentialParams) -> float:
    w1 = p.omega1
    return min(w1, math.pi - w1, abs(math.pi - 2 * w1)) / 4.0


def side_of(p: PotentialParams, phi: float, halfwidth: float | None = None) -> str | None:
    """Which neighbourhood ``phi`` falls in, or ``None``."""
    if p.is_free or not p.resonance_ok:
        return None
    for side in SIDES:
        if CriticalNeighborhood.for_params(p, side, halfwidth).contains(phi):
            return side
    return None


def _center(p: PotentialParams, side: str) -> float:
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    return p.omega1 if side == "plus" else math.pi - p.omega1


def _check(p: PotentialParams, side: str, phi: float, strict: bool = True):
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi = {phi} is outside (0, pi)")
    if p.is_free:
        return
    p.require_resonance()
    nb = CriticalNeighborhood.for_params(p, side)
    if strict and not nb.contains(phi):
        lo, hi = nb.interval
        raise DomainError(f"phi = {phi} is outside U_{side} = ({lo:.6g}, {hi:.6g})")


# -- oscillatory tails -----------------------------------------------------

def tail_sum_bound(xi: float, n: int) -> float:
    """Upper bound ``1 / (n |sin(xi/2)|)`` for ``|sum_{k>=n} e^{i k xi} / k|``."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    r = math.remainder(xi, 2 * math.pi)
    if abs(r) < 1e-12:
        raise DomainError(f"xi = {xi} lies in 2*pi*Z; the series diverges")
    return 1.0 / (n * abs(math.sin(0.5 * xi)))


def _abel_bound(x: float, K: int) -> tuple[float, int]:
    """Best remainder bound over the number ``m`` of summation-by-parts terms."""
    best, best_m = math.inf, 1
    log_b = 0.0  # log((m-1)!) - m log x - sum log(K+i)
    for m in range(1, _M_MAX + 1):
        log_b += (math.log(m - 1) if m > 1 else 0.0) - math.log(x) - math.log(K + m - 1)
        b = math.exp(log_b)
        if b < best:
            best, best_m = b, m
        elif b > 4 * best:
            break
    return best, best_m


def _abel_expansion(z: complex, K: int, m: int) -> complex:
    """``sum_{j<m} z^{K+j} (-1)^j j! / (K (K+1) ... (K+j) (1-z)^{j+1})``."""
    one_minus = -np.expm1(1j * np.angle(z))
    total = 0j
    coef = 1.0
    zk = z**K
    for j in range(m):
        coef /= K + j
        total += zk * coef / one_minus ** (j + 1)
        coef *= -(j + 1)
        zk *= z
    return total


def _explicit(xi: float, lo: int, hi: int) -> complex:
    total = 0j
    for a in range(lo, hi, _CHUNK):
        k = np.arange(a, min(hi, a + _CHUNK), dtype=float)
        total += np.sum(np.exp(1j * xi * k) / k)
    return complex(total)


def oscillatory_tail(xi: float, n: int, tol: float = 1e-15) -> tuple[complex, float]:
    """``sum_{k>=n} e^{i k xi} / k`` with a certified error bound.

    Returns ``(value, bound)``.  The cutoff ``K`` grows until the
    summation-by-parts remainder is below ``tol``.  When that would need more
    than ``2**24`` terms (``xi`` very close to ``2 pi Z``), the exact Abel
    limit ``-log(1 - e^{i xi})`` minus the partial sum is used instead and
    the bound is the floating-point rounding estimate of that route.
    """
    x = 2.0 * abs(math.sin(0.5 * xi))
    if abs(math.remainder(xi, 2 * math.pi)) < 1e-12:
        raise DomainError(f"xi = {xi} lies in 2*pi*Z; the series diverges")
    K = int(n)
    bound, m = _abel_bound(x, K)
    while bound > tol and K < _K_MAX:
        K = min(_K_MAX, max(2 * K, K + 64))
        bound, m = _abel_bound(x, K)
    if bound <= tol:
        z = complex(math.cos(xi), math.sin(xi))
        value = _explicit(xi, n, K) + _abel_expansion(z, K, m)
        # phase error of xi*k in the explicit part, plus summation rounding
        rounding = 4 * _EPS * (abs(value) + math.log(K / n + 1.0) + abs(xi) * (K - n) + 1.0)
        return value, bound + rounding
    if n - 1 <= _K_MAX:
        log_term = -np.log(-np.expm1(1j * xi))
        partial = _explicit(xi, 1, n)
        value = complex(log_term - partial)
        rounding = 8 * _EPS * (abs(log_term) + math.log(n + 1) + 1.0) * math.sqrt(n + 1.0)
        if rounding <= max(tol, 1e3 * _EPS):
            return value, rounding
        raise ConvergenceError(f"tail at xi={xi}, n={n}: bound {rounding:.3g} > tol {tol:.3g}", rounding)
    raise ConvergenceError(f"tail at xi={xi}, n={n}: bound {bound:.3g} > tol {tol:.3g}", bound)


# -- the transformation T --------------------------------------------------

def _t_terms(p: PotentialParams, side: str, phi: float, k: np.ndarray) -> np.ndarray:
    """Summands ``t_k`` with ``T_n = sum_{k>=n} t_k``."""
    v = _wvn_part(p, phi, k)
    beta_k = p.abs_c / (4.0 * k * math.sin(p.omega1))
    w1, d1 = p.omega1, p.delta1
    if side == "plus":
        return -v + beta_k[:, None, None] * offdiag_phase(2 * (phi - w1) * k - d1)
    return -v - beta_k[:, None, None] * offdiag_phase(2 * (phi + w1) * k + d1)


def _wvn_part(p: PotentialParams, phi: float, k: np.ndarray) -> np.ndarray:
    m = k + 1.0
    s = math.sin(phi)
    ac, w1, d1 = p.abs_c, p.omega1, p.delta1
    diag = ac * np.sin(2 * w1 * m + d1) / (2j * m * s)
    a = ac / (4.0 * m * s)
    ep = np.exp(1j * (2 * (phi - w1) * m - d1))
    em = np.exp(1j * (2 * (phi + w1) * m + d1))
    return mat2(diag, a * (ep - em), a * np.conj(ep - em), -diag)


def _T_at(p: PotentialParams, side: str, phi: float, n: int, tol: float) -> tuple[np.ndarray, float]:
    """Closed expression of ``T_n`` through oscillatory tails; returns ``(T, bound)``."""
    a = p.abs_c / 4.0
    s = math.sin(phi)
    w1, d1 = p.omega1, p.delta1
    s1 = math.sin(w1)
    eps_p = 2.0 * (phi - w1)
    # e^{i k 2(phi + w1)} = e^{i k 2(phi - (pi - w1))}; the reduced frequency avoids cancellation
    eps_m = 2.0 * (phi - (math.pi - w1))
    dcoef = 1.0 / s1 - 1.0 / s  # vanishes at either center: sin(pi - w1) = sin(w1)
    eps_res = eps_p if side == "plus" else eps_m
    # near-resonant tail times its O(eps) coefficient is O(eps log(1/eps)); drop it at the center
    skipped = 0.0
    if abs(eps_res) < 1e-12:
        skipped = 2 * a * (abs(dcoef) + abs(eps_res)) * (math.log(1e12 / n) + 2.0 + 1.0 / n)
        dcoef = 0.0

    terms = []  # (coef11, coef12, coef21, xi, start)

    def add(c11, c12, c21, xi, start):
        if c11 == 0 and c12 == 0 and c21 == 0:
            return
        terms.append((c11, c12, c21, xi, start))

    e = complex(math.cos(d1), math.sin(d1))
    ec = e.conjugate()
    # diagonal: (a/s)[e^{i d1} U(2 w1, n+1) - e^{-i d1} U(-2 w1, n+1)] sigma_z
    add(a / s * e, 0, 0, 2 * w1, n + 1)
    add(-a / s * ec, 0, 0, -2 * w1, n + 1)
    explicit = np.zeros((2, 2), dtype=complex)
    if side == "plus":
        add(0, a * ec * dcoef, 0, eps_p, n + 1)
        add(0, 0, a * e * dcoef, -eps_p, n + 1)
        explicit[0, 1] += a * ec / s1 * np.exp(1j * n * eps_p) / n
        explicit[1, 0] += a * e / s1 * np.exp(-1j * n * eps_p) / n
        add(0, a / s * e, 0, eps_m, n + 1)
        add(0, 0, a / s * ec, -eps_m, n + 1)
    else:
        add(0, -a / s * ec, 0, eps_p, n + 1)
        add(0, 0, -a / s * e, -eps_p, n + 1)
        add(0, -a * e * dcoef, 0, eps_m, n + 1)
        add(0, 0, -a * ec * dcoef, -eps_m, n + 1)
        explicit[0, 1] -= a * e / s1 * np.exp(1j * n * eps_m) / n
        explicit[1, 0] -= a * ec / s1 * np.exp(-1j * n * eps_m) / n

    T = explicit
    total_bound = skipped
    share = tol / max(len(terms), 1)
    for c11, c12, c21, xi, start in terms:
        cmax = max(abs(c11), abs(c12), abs(c21))
        if cmax < 1e-300:
            continue
        val, b = oscillatory_tail(xi, start, share / cmax)
        T[0, 0] += c11 * val
        T[1, 1] -= c11 * val
        T[0, 1] += c12 * val
        T[1, 0] += c21 * val
        total_bound += 2 * cmax * b
    return T, total_bound


def harris_lutz_T(p: PotentialParams, side: str, n: int, phi: float, tol: float = 1e-13,
                  return_bound: bool = False):
    """``T^{+-}_n(phi)``: minus the tail sum of the non-resonant part of ``M_k - I``.

    Free mode (``c = 0``) gives the zero matrix.  With ``return_bound`` the
    certified truncation bound (entrywise, absolute) is returned as well.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check(p, side, phi)
    if p.is_free:
        T, b = np.zeros((2, 2), dtype=complex), 0.0
    else:
        T, b = _T_at(p, side, phi, int(n), tol)
    return (T, b) if return_bound else T


def harris_lutz_T_range(p: PotentialParams, side: str, phi: float, n0: int, n1: int,
                        tol: float = 1e-13) -> tuple[np.ndarray, float]:
    """``T_n`` for ``n = n0 .. n1`` (inclusive), shape ``(n1 - n0 + 1, 2, 2)``.

    ``T_{n1}`` comes from the certified tail; the rest by backward explicit
    summation ``T_n = T_{n+1} + t_n``.
    """
    if not 1 <= n0 <= n1:
        raise DomainError("need 1 <= n0 <= n1")
    _check(p, side, phi)
    count = n1 - n0 + 1
    if p.is_free:
        return np.zeros((count, 2, 2), dtype=complex), 0.0
    T_end, bound = _T_at(p, side, phi, int(n1), tol)
    k = np.arange(n0, n1, dtype=float)
    t = _t_terms(p, side, phi, k)
    out = np.empty((count, 2, 2), dtype=complex)
    out[-1] = T_end
    if count > 1:
        out[:-1] = T_end + np.cumsum(t[::-1], axis=0)[::-1]
    return out, bound


# -- basis change and reduced system --------------------------------------

def basis_change(p: PotentialParams, side: str) -> np.ndarray:
    """Constant ``G`` with ``G X G^{-1}`` turning the resonant term into ``beta/n K(eps n)``.

    plus: ``C^{-1} diag(e^{i d1/2}, e^{-i d1/2})``;
    minus: ``Q C^{-1} diag(e^{-i d1/2}, e^{i d1/2})`` with the quarter turn
    ``Q = [[0, 1], [-1, 0]]`` flipping the sign of the resonant term.
    """
    h = 0.5 * p.delta1
    if side == "plus":
        d = np.diag([np.exp(1j * h), np.exp(-1j * h)])
        return C_SIM_INV @ d
    if side == "minus":
        d = np.diag([np.exp(-1j * h), np.exp(1j * h)])
        q = np.array([[0, 1], [-1, 0]], dtype=complex)
        return q @ C_SIM_INV @ d
    raise ValueError(f"side must be one of {SIDES}, got {side!r}")


@dataclass(frozen=True)
class ReducedSystemStep:
    """``hat M_n = I + resonant + remainder`` (arrays may carry a leading ``n`` axis)."""

    resonant: np.ndarray
    remainder: np.ndarray

    @property
    def step(self) -> np.ndarray:
        return I2 + self.resonant + self.remainder


def resonant_term(p: PotentialParams, side: str, n, phi: float) -> np.ndarray:
    """``beta/n K(2 (phi - center) n)`` in the reduced basis (zero in free mode)."""
    n = np.asarray(n, dtype=float)
    if p.is_free:
        return np.zeros(n.shape + (2, 2), dtype=complex)
    eps = 2.0 * (phi - _center(p, side))
    return (p.beta / n)[..., None, None] * rot_refl(eps * n) + 0j


def conjugated_step(p: PotentialParams, side: str, n, phi: float, tol: float = 1e-13) -> np.ndarray:
    """``exp(-T_{n+1}) M_n exp(T_n)`` before the constant change of basis."""
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    lo, hi = int(n_arr.min()), int(n_arr.max())
    T, _ = harris_lutz_T_range(p, side, phi, lo, hi + 1, tol)
    M = transfer_matrix(p, n_arr, phi)
    idx = n_arr - lo
    out = expm2(-T[idx + 1]) @ M @ expm2(T[idx])
    return out[0] if np.ndim(n) == 0 else out


def reduced_step(p: PotentialParams, side: str, n, phi: float, tol: float = 1e-13) -> ReducedSystemStep:
    """Step of the reduced system split as ``I + resonant + remainder``.

    The remainder is whatever is left of the computed step; nothing is modelled.
    """
    _check(p, side, phi)
    g = basis_change(p, side)
    g_inv = np.linalg.inv(g)
    step = g @ conjugated_step(p, side, n, phi, tol) @ g_inv
    res = resonant_term(p, side, n, phi)
    return ReducedSystemStep(res, step - I2 - res)


def remainder_norms(p: PotentialParams, side: str, phi: float, N: int, tol: float = 1e-13,
                    reduced: bool = False) -> np.ndarray:
    """``|R_n|_F`` for ``n = 1..N`` (Harris-Lutz remainder, or the reduced one)."""
    n = np.arange(1, N + 1)
    if reduced:
        r = reduced_step(p, side, n, phi, tol).remainder
    else:
        step = conjugated_step(p, side, n, phi, tol)
        w1, d1 = p.omega1, p.delta1
        sign = 1.0 if side == "plus" else -1.0
        beta_n = 0.0 if p.is_free else p.beta / n
        alpha = 2 * (phi - w1) * n - d1 if side == "plus" else 2 * (phi + w1) * n + d1
        r = step - I2 - sign * np.asarray(beta_n)[..., None, None] * offdiag_phase(alpha)
    return np.sqrt(np.sum(np.abs(r) ** 2, axis=(-2, -1)))


# -- the orthogonal-polynomial solution in reduced coordinates ------------

def p_hat_sequence(p: PotentialParams, side: str, phi: float, n0: int, n1: int,
                   P: np.ndarray | None = None, tol: float = 1e-13) -> np.ndarray:
    """``hat p_n(phi)`` for ``n = n0..n1``; shape ``(n1 - n0 + 1, 2)``.

    ``hat p_n = G exp(-T_n) W_n^{-1} (P_n, P_{n+1})``.  ``P`` may be passed
    in (``P[k] = P_{k+1}``, at least ``n1 + 1`` entries) to avoid recomputing
    the polynomials.
    """
    _check(p, side, phi)
    if P is None:
        P = orthogonal_polynomials(p, 2 * math.cos(phi), n1 + 1)
    v = to_v(P[n0 - 1:n1 + 1], phi, start=n0)
    T, _ = harris_lutz_T_range(p, side, phi, n0, n1, tol)
    g = basis_change(p, side)
    w = np.einsum("nij,nj->ni", expm2(-T), v)
    return w @ g.T


def p_hat(p: PotentialParams, side: str, n: int, phi: float, tol: float = 1e-13) -> np.ndarray:
    if n < 1:
        raise DomainError("n must be a positive integer")
    return p_hat_sequence(p, side, phi, n, n, tol=tol)[0]


class LimitEstimate(NamedTuple):
    value: np.ndarray
    error: float
    n_terms: int
    window: int


def n_min(distance: float, factor: float = 2000.0) -> int:
    """Default run length ``ceil(factor / |phi - center|)``."""
    if distance <= 0:
        raise DomainError("the limit does not exist at the critical point itself")
    # absorb round-off in distance, which is usually recomputed from phi
    return int(math.ceil(factor / distance * (1.0 - 1e-12)))


def p_hat_infinity(p: PotentialParams, side: str, phi: float, N: int | None = None,
                   tol: float = 1e-3, P: np.ndarray | None = None) -> LimitEstimate:
    """Limit of ``hat p_n(phi)`` by averaging over one trailing beat period.

    The beat period of the resonant term is ``pi / |phi - center|`` steps
    (capped at ``N/10``).  ``error`` is the difference between the last two
    window averages; above ``tol`` relative to the limit a
    :class:`ConvergenceError` is raised.
    """
    _check(p, side, phi)
    if p.is_free:
        N = 1000 if N is None else int(N)
        window = max(N // 10, 1)
    else:
        d = abs(phi - _center(p, side))
        need = n_min(d)
        N = need if N is None else int(N)
        if N < need:
            raise DomainError(f"N = {N} below N_min = {need} for |phi - center| = {d:.3g}")
        window = max(min(int(round(math.pi / d)), N // 10), 8)
    if P is None:
        P = orthogonal_polynomials(p, 2 * math.cos(phi), N + 1)
    n0 = N - 2 * window + 1
    ph = p_hat_sequence(p, side, phi, n0, N, P=P)
    prev = ph[:window].mean(axis=0)
    last = ph[window:].mean(axis=0)
    err = float(np.linalg.norm(last - prev))
    scale = float(np.linalg.norm(last))
    if scale == 0.0 or err > tol * scale:
        raise ConvergenceError(
            f"hat p_n did not settle at phi={phi}: window spread {err:.3g} (|p|={scale:.3g})",
            err / scale if scale else math.inf,
        )
    return LimitEstimate(last, err, N, window)
