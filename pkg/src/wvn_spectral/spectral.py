"""Spectral density, critical-point exponents and the pseudogap fit.

Two independent routes to the density are provided:

* the Harris-Lutz route: inside the neighbourhoods ``U_+-`` of the critical
  points, ``rho'(2 cos phi) = 1 / (4 pi sin(phi) |hat p_inf(phi)|^2)``;
* the amplitude oracle: the orthogonal polynomials oscillate as
  ``P_n ~ A cos(phi n + theta)`` with ``A = |F| / sin(phi)``, and
  ``rho' = sqrt(4 - lam^2) / (2 pi |F|^2)``.

Outside ``U_+-`` :func:`spectral_density` uses the oracle.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import (
    PotentialParams,
    generalized_eigenvector,
    lambda_to_point,
    orthogonal_polynomials,
    to_v,
)
from .errors import ConvergenceError, DomainError
from .harris_lutz import SIDES, n_min, p_hat_infinity, side_of
from .linalg2 import det2, singular_values2

__all__ = [
    "CriticalPoint",
    "critical_points",
    "PowerLawFit",
    "DensityPoint",
    "DensityScan",
    "GevFit",
    "Classification",
    "spectral_density",
    "amplitude_oracle_density",
    "density_scan",
    "gev_exponent_fit",
    "pseudogap_fit",
    "classify_critical_point",
    "find_exceptional_delta",
    "default_eps_grid",
]

CRITICAL_TOL = 1e-12
FAILURE_FLAGS = ("nonconverged", "critical", "domain", "nonpositive")


# -- types -----------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    """One of the two resonance points ``nu = +-2 cos(omega)``.

    ``side`` is ``"plus"`` for ``nu = 2 cos(omega1)`` (``side_phi = omega1``)
    and ``"minus"`` for ``nu = -2 cos(omega1)`` (``side_phi = pi - omega1``).
    """

    nu: float
    side_phi: float
    side: str
    predicted_exponent: float
    predicted_gev_exponent: float

    @classmethod
    def for_params(cls, p: PotentialParams, side: str) -> "CriticalPoint":
        p.require_resonance()
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {side!r}")
        w1 = p.omega1
        phi = w1 if side == "plus" else math.pi - w1
        return cls(
            nu=2.0 * math.cos(phi),
            side_phi=phi,
            side=side,
            predicted_exponent=p.abs_c / (2.0 * abs(math.sin(p.omega))),
            predicted_gev_exponent=p.beta,
        )


def critical_points(p: PotentialParams) -> tuple[CriticalPoint, CriticalPoint]:
    """``(plus, minus)`` critical points."""
    return CriticalPoint.for_params(p, "plus"), CriticalPoint.for_params(p, "minus")


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit ``log rho' = exponent * log|lam - nu| + log_prefactor``.

    ``excluded`` lists ``(eps, reason)`` for grid points left out of the fit;
    ``samples`` holds ``(eps, lam, rho', error_estimate)`` for those in it.
    """

    exponent: float
    log_prefactor: float
    residual_rms: float
    points_used: int
    side: str
    excluded: tuple = ()
    samples: tuple = ()

    @property
    def prefactor(self) -> float:
        return math.exp(self.log_prefactor)


@dataclass(frozen=True)
class DensityPoint:
    lam: float
    phi: float
    rho_prime: float
    error_estimate: float
    flags: str = ""


@dataclass(frozen=True)
class DensityScan:
    grid: tuple[DensityPoint, ...]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([g.lam for g in self.grid])

    @property
    def rho_prime(self) -> np.ndarray:
        return np.array([g.rho_prime for g in self.grid])

    @property
    def n_flagged(self) -> int:
        return sum(1 for g in self.grid if g.flags)


@dataclass(frozen=True)
class GevFit:
    """Growth exponents of generalized eigenvectors at a critical point."""

    exponent_plus: float
    exponent_minus: float
    residual_plus: float
    residual_minus: float
    correlation: float
    warnings: tuple = ()

    def __iter__(self):
        # unpacks as (exponent_plus, exponent_minus)
        return iter((self.exponent_plus, self.exponent_minus))


@dataclass(frozen=True)
class Classification:
    kind: str
    scaled_limit: float
    borderline: bool = False
    diagnostics: dict = field(default_factory=dict)

    def __str__(self):
        return self.kind


# -- density ---------------------------------------------------------------

def _reject_critical(p: PotentialParams, phi: float):
    if p.is_free or not p.resonance_ok:
        return
    w1 = p.omega1
    for c in (w1, math.pi - w1):
        if abs(phi - c) < CRITICAL_TOL:
            raise DomainError(
                f"lambda = {2 * math.cos(phi):.15g} is a critical point; use "
                "gev_exponent_fit, pseudogap_fit or classify_critical_point there"
            )


def _nearest_critical_distance(p: PotentialParams, phi: float) -> float:
    if p.is_free or not p.resonance_ok:
        return math.inf
    w1 = p.omega1
    return min(abs(phi - w1), abs(phi - (math.pi - w1)))


def _oracle_length(p: PotentialParams, phi: float) -> int:
    d = _nearest_critical_distance(p, phi)
    if math.isinf(d):
        return 4000
    return max(n_min(d), 4000)


def _lsq_amplitude(P: np.ndarray, phi: float, lo: int, hi: int) -> float:
    """Amplitude of the best fit ``a cos(phi n) + b sin(phi n)`` to ``P_n``, ``lo <= n < hi``."""
    n = np.arange(lo, hi, dtype=float)
    basis = np.stack([np.cos(phi * n), np.sin(phi * n)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, P[lo - 1:hi - 1], rcond=None)
    return float(math.hypot(coef[0], coef[1]))


def _extrema_amplitude(P: np.ndarray, lo: int, hi: int) -> float:
    seg = P[lo - 1:hi - 1]
    return 0.5 * float(seg.max() - seg.min())


def _amplitude(P, phi, lo, hi, method):
    if method == "lsq":
        return _lsq_amplitude(P, phi, lo, hi)
    if method == "extrema":
        return _extrema_amplitude(P, lo, hi)
    raise ValueError(f"method must be 'lsq' or 'extrema', got {method!r}")


def amplitude_oracle_density(p: PotentialParams, lam: float, N: int | None = None,
                             method: str = "lsq", return_error: bool = False):
    """Density from the oscillation amplitude of ``P_n(lam)``.

    The amplitude ``A`` is taken over the trailing window ``[N - L, N)``,
    ``L = max(N / 10, beat period)``.  ``method="lsq"`` fits ``a cos(phi n) +
    b sin(phi n)``; ``method="extrema"`` uses ``(max - min) / 2``, which
    under-reads when ``phi / pi`` has a small denominator and the samples
    miss the crests.

    With ``return_error`` the result is ``(rho, err)`` where ``err`` is the
    change in ``rho`` between the last two windows.
    """
    pt = lambda_to_point(lam)
    _reject_critical(p, pt.phi)
    if N is None:
        N = _oracle_length(p, pt.phi)
    N = int(N)
    d = _nearest_critical_distance(p, pt.phi)
    beat = 0 if math.isinf(d) else int(math.ceil(math.pi / d))
    L = max(N // 10, beat, int(math.ceil(2 * math.pi / min(pt.phi, math.pi - pt.phi))))
    if 2 * L >= N:
        raise DomainError(f"N = {N} too short: the amplitude window needs 2 * {L} steps")
    P = orthogonal_polynomials(p, pt.lam, N + 1)
    s = math.sin(pt.phi)
    dens = []
    for lo, hi in ((N - 2 * L, N - L), (N - L, N)):
        amp = _amplitude(P, pt.phi, lo + 1, hi + 1, method)
        if amp == 0.0:
            raise ConvergenceError("zero oscillation amplitude", math.inf)
        dens.append(math.sqrt(4.0 - pt.lam**2) / (2.0 * math.pi * (amp * s) ** 2))
    rho = dens[-1]
    if return_error:
        return rho, abs(dens[-1] - dens[-2])
    return rho


def spectral_density(p: PotentialParams, lam: float, N: int | None = None,
                     tol: float = 1e-3) -> tuple[float, float]:
    """``(rho', error_estimate)`` at ``lam`` in the open band.

    Inside ``U_+-`` (and in free mode, where ``T = 0``) this evaluates
    ``1 / (4 pi sin(phi) |hat p_inf|^2)``; elsewhere it falls back to
    :func:`amplitude_oracle_density`.  ``error_estimate`` is absolute.
    """
    pt = lambda_to_point(lam)
    _reject_critical(p, pt.phi)
    side = "plus" if p.is_free else side_of(p, pt.phi)
    if side is None:
        rho, err = amplitude_oracle_density(p, lam, N, return_error=True)
        if err > tol * rho:
            raise ConvergenceError(
                f"amplitude oracle did not settle at lambda={lam}: relative spread {err / rho:.3g}",
                err / rho,
            )
        return rho, err
    est = p_hat_infinity(p, side, pt.phi, N=N, tol=tol)
    norm = float(np.linalg.norm(est.value))
    rho = 1.0 / (4.0 * math.pi * math.sin(pt.phi) * norm**2)
    return rho, 2.0 * rho * est.error / norm


def _scan_point(p, lam, N, tol) -> DensityPoint:
    phi = math.acos(0.5 * lam)
    try:
        rho, err = spectral_density(p, lam, N, tol)
        flags = "" if rho > 0 else "nonpositive"
    except ConvergenceError as exc:
        rho, err, flags = math.nan, exc.best, "nonconverged"
    except DomainError as exc:
        rho, err = math.nan, math.nan
        flags = "critical" if "critical point" in str(exc) else "domain"
    return DensityPoint(float(lam), phi, rho, err, flags)


def density_scan(p: PotentialParams, lam_min: float, lam_max: float, points: int,
                 N: int | None = None, tol: float = 1e-3, workers: int = 1) -> DensityScan:
    """Density on ``points`` equispaced values in ``[lam_min, lam_max]``.

    Points that fail are kept with ``rho_prime = nan`` and a flag.  With
    ``workers > 1`` points run on a thread pool (the inner loops release the
    GIL); results come back in grid order either way.
    """
    if not -2.0 < lam_min < lam_max < 2.0:
        raise DomainError("need -2 < lam_min < lam_max < 2")
    if points < 2:
        raise DomainError("need at least two grid points")
    grid = np.linspace(lam_min, lam_max, int(points))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(lambda x: _scan_point(p, x, N, tol), grid))
    else:
        out = [_scan_point(p, x, N, tol) for x in grid]
    return DensityScan(tuple(out))


# -- critical points -------------------------------------------------------

def _reference(p: PotentialParams, cp: CriticalPoint, n: np.ndarray) -> np.ndarray:
    arg = p.omega1 * n + 0.5 * p.delta1
    if cp.side == "plus":
        return np.cos(arg)
    return (-1.0) ** n * np.sin(arg)


def _block_envelope(u: np.ndarray, lo: int, hi: int, width: int):
    """Block maxima of ``|u_n|`` for ``lo <= n < hi``; returns block centres and maxima."""
    seg = np.abs(u[lo - 1:hi - 1])
    nb = len(seg) // width
    seg = seg[: nb * width].reshape(nb, width)
    centres = lo + width * np.arange(nb) + 0.5 * (width - 1)
    return centres, seg.max(axis=1)


def _loglog(x, y):
    coef, res, *_ = np.polyfit(np.log(x), np.log(y), 1, full=True)
    rms = math.sqrt(float(res[0]) / len(x)) if len(res) else 0.0
    return float(coef[0]), float(coef[1]), rms


def _two_solutions(p, lam, N, rng):
    sols = []
    for _ in range(2):
        u1, u2 = rng.standard_normal(2)
        sols.append(generalized_eigenvector(p, lam, N + 1, u1, u2))
    return sols


def gev_exponent_fit(p: PotentialParams, critical: CriticalPoint, N: int = 10**6,
                     seed: int = 0, residual_threshold: float = 0.05) -> GevFit:
    """Dominant and subdominant growth exponents at ``lam = nu``.

    Two generalized eigenvectors with random initial data are run to ``N``.
    The dominant exponent is the mean log-log slope of their envelopes (block
    maxima of ``|u_n|``) over ``[N/10, N]``.  The subdominant exponent is the
    slope of ``sigma_2 = |det| / sigma_1`` of the matrix of the two ``v_n``.
    ``correlation`` compares ``u_n / n^beta`` of the first solution with the
    predicted oscillation over the last decade.
    """
    p.require_resonance()
    rng = np.random.default_rng(seed)
    lam, phi = critical.nu, critical.side_phi
    sols = _two_solutions(p, lam, N, rng)
    lo, hi = max(N // 10, 1), N
    period = 2.0 * math.pi / min(p.omega1, math.pi - p.omega1)
    width = max(64, 4 * int(math.ceil(period)))
    slopes, resid = [], []
    for u in sols:
        x, y = _block_envelope(u, lo, hi, width)
        k, _, r = _loglog(x, y)
        slopes.append(k)
        resid.append(r)
    # subdominant exponent from the area of the pair of solutions in v-space
    v = [to_v(u, phi) for u in sols]
    n = np.arange(lo, hi, dtype=int)
    stride = max(1, len(n) // 4000)
    n = n[::stride]
    mats = np.stack([v[0][n - 1], v[1][n - 1]], axis=-1)
    s1, _ = singular_values2(mats)
    s2 = np.abs(det2(mats)) / s1
    km, _, rm = _loglog(n.astype(float), s2)
    # oscillatory factor
    m = np.arange(lo, hi, dtype=float)
    u = sols[0][lo - 1:hi - 1] / m**p.beta
    corr = abs(float(np.corrcoef(u, _reference(p, critical, m))[0, 1]))
    warns = []
    worst = max(max(resid), rm)
    if worst > residual_threshold:
        warns.append(f"fit residual {worst:.3g} above threshold {residual_threshold}")
    return GevFit(float(np.mean(slopes)), km, max(resid), rm, corr, tuple(warns))


def _phi_for(critical: CriticalPoint, side: str, eps: float) -> float:
    # right of nu means larger lambda, i.e. smaller phi
    if side == "right":
        return critical.side_phi - 0.5 * eps
    if side == "left":
        return critical.side_phi + 0.5 * eps
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def default_eps_grid(k_max: int = 7, eps0: float = 0.2) -> np.ndarray:
    """``eps_k = eps0 * 2^-k`` for ``k = 0..k_max``."""
    return eps0 * 0.5 ** np.arange(k_max + 1)


def _default_n_rule(eps: float) -> int:
    # N_min for |phi - nu_phi| = eps / 2
    return n_min(0.5 * eps)


def pseudogap_fit(p: PotentialParams, critical: CriticalPoint, side: str,
                  eps_grid=None, n_rule=_default_n_rule, tol: float = 1e-3,
                  check_regular: bool = True, workers: int = 1) -> PowerLawFit:
    """One-sided power law of ``rho'`` at a critical point.

    Grid points are ``lam_k = 2 cos(side_phi -+ eps_k / 2)``; ``side="right"``
    takes ``lam > nu``.  Points whose density fails to converge are
    excluded and recorded.  If dropping the two largest ``eps`` improves the
    rms residual at least twofold (and leaves three points) they are dropped.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    eps_grid = default_eps_grid() if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0):
        raise DomainError("eps_grid must be positive")
    if check_regular:
        cls = classify_critical_point(p, critical)
        if cls.kind != "regular":
            raise DomainError(f"critical point {critical.nu:.6g} is a {cls.kind}; no pseudogap law")

    def one(eps):
        phi = _phi_for(critical, side, eps)
        lam = 2.0 * math.cos(phi)
        try:
            rho, err = spectral_density(p, lam, n_rule(eps), tol)
            return eps, lam, rho, err, None
        except (ConvergenceError, DomainError) as exc:
            return eps, lam, math.nan, math.nan, str(exc)

    order = np.argsort(-eps_grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, eps_grid[order]))
    else:
        rows = [one(e) for e in eps_grid[order]]
    excluded = [(float(e), why) for e, _, _, _, why in rows if why is not None]
    good = [(e, lam, rho, err) for e, lam, rho, err, why in rows if why is None and rho > 0]
    if len(good) < 3:
        raise ConvergenceError(f"only {len(good)} grid points converged; need 3", len(good))
    x = np.array([abs(g[1] - critical.nu) for g in good])
    y = np.array([g[2] for g in good])
    k, b, r = _loglog(x, y)
    if len(good) >= 5:
        k2, b2, r2 = _loglog(x[2:], y[2:])
        if r2 * 2.0 <= r:
            excluded += [(float(good[i][0]), "pre-asymptotic") for i in range(2)]
            good = good[2:]
            k, b, r = k2, b2, r2
    return PowerLawFit(k, b, r, len(good), side, tuple(excluded),
                       tuple(tuple(float(v) for v in g) for g in good))


def _scaled_profile(p: PotentialParams, critical: CriticalPoint, N: int):
    """Trailing-decade data of ``P_n`` at ``nu`` scaled by ``n^-beta``."""
    P = orthogonal_polynomials(p, critical.nu, N + 1)
    lo = max(N // 10, 1)
    n = np.arange(lo, N + 1, dtype=float)
    return P, n, P[lo - 1:N] / n**p.beta


def _signed_amplitude(p: PotentialParams, critical: CriticalPoint, N: int) -> float:
    _, n, y = _scaled_profile(p, critical, N)
    ref = _reference(p, critical, n)
    return float(np.dot(y, ref) / np.dot(ref, ref))


def classify_critical_point(p: PotentialParams, critical: CriticalPoint, N: int = 10**5,
                            tol: float = 1e-2) -> Classification:
    """Decide whether ``P_n(nu)`` follows the growing solution.

    The diagnostic is ``|v_N(P)| / (sigma_1(Pi_N) |v_1(P)|)`` where ``Pi_N``
    maps ``v_1`` to ``v_N`` for every solution.  A generic trajectory picks up
    the full growth and the ratio is of order one.  If it is below ``tol``
    the polynomials lie in the kernel of the limiting rank-one map: an
    eigenvalue when ``beta > 1/2``, a half-bound state otherwise.
    """
    p.require_resonance()
    lam, phi = critical.nu, critical.side_phi
    P = orthogonal_polynomials(p, lam, N + 1)
    Q = generalized_eigenvector(p, lam, N + 1, 0.0, 1.0)
    # v-products of the two solutions: columns are v_n(P), v_n(Q)
    vp = to_v(P, phi)
    vq = to_v(Q, phi)
    V1 = np.stack([vp[0], vq[0]], axis=-1)
    VN = np.stack([vp[N - 1], vq[N - 1]], axis=-1)
    Pi = VN @ np.linalg.inv(V1)
    s1, _ = singular_values2(Pi)
    ratio = float(np.linalg.norm(vp[N - 1]) / (float(s1) * np.linalg.norm(vp[0])))
    borderline = tol / 10.0 < ratio < tol * 10.0
    if ratio < tol:
        kind = "eigenvalue" if p.beta > 0.5 else "half_bound_state"
    else:
        kind = "regular"
    if borderline:
        warnings.warn(f"classification borderline: scaled limit {ratio:.3g} vs tol {tol}",
                      RuntimeWarning, stacklevel=2)
    return Classification(kind, ratio, borderline, {"sigma1": float(s1), "N": N, "beta": p.beta})


def find_exceptional_delta(p: PotentialParams, critical: CriticalPoint, N: int = 10**5,
                           delta0: float = 0.0) -> float:
    """Phase ``delta`` at which the growing part of ``P_n(nu)`` vanishes.

    The signed amplitude of ``P_n / n^beta`` against the predicted oscillation
    changes sign between ``delta0`` and ``delta0 + 2 pi`` (shifting ``delta``
    by ``2 pi`` leaves the potential unchanged but flips the reference), so a
    bracketing root search is guaranteed to find a zero.
    """
    p.require_resonance()

    def amp(d):
        q = PotentialParams(p.c, p.omega, d, p.q)
        return _signed_amplitude(q, critical, N)

    a0 = amp(delta0)
    if a0 == 0.0:
        return delta0
    # sample to find the first sign change, then refine
    grid = delta0 + np.linspace(0.0, 2 * math.pi, 17)
    vals = [a0] + [amp(d) for d in grid[1:]]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0:
            return float(brentq(amp, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14))
    raise ConvergenceError("no sign change of the growing amplitude over one period", math.nan)
