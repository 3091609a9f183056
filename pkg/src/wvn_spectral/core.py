"""Operator model: potential, spectral coordinates, recurrence and transfer matrices.

The operator is the Jacobi matrix with unit off-diagonal and diagonal

    b_n = c sin(2 omega n + delta) / n + q_n,      n >= 1.

Its generalized eigenvectors solve ``u_{n-1} + b_n u_n + u_{n+1} = lam u_n``
for ``n >= 2``.  Inside the band ``lam = 2 cos(phi)``, ``phi`` in ``(0, pi)``,
and the variation-of-parameters substitution

    (u_n, u_{n+1})^T = W_n(phi) v_n,
    W_n = [[e^{-i phi n}, e^{i phi n}], [e^{-i phi (n+1)}, e^{i phi (n+1)}]]

turns the recurrence into ``v_{n+1} = M_n(phi) v_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, ParameterError
from .linalg2 import I2, mat2
from .sequences import SequenceFamily

__all__ = [
    "PotentialParams",
    "SpectralPoint",
    "lambda_to_point",
    "phi_to_point",
    "potential_value",
    "potential",
    "orthogonal_polynomials",
    "generalized_eigenvector",
    "transfer_matrix",
    "transfer_matrix_parts",
    "vop_matrix",
    "vop_inverse",
    "to_v",
    "recurrence_matrix",
]


@dataclass(frozen=True)
class PotentialParams:
    """Wigner-von Neumann amplitude, frequency and phase plus a summable tail.

    ``c = 0`` is the free-operator oracle mode.  The resonance analysis
    (critical points, Harris-Lutz reduction) additionally needs
    ``omega`` outside ``pi Z / 2``; see :meth:`require_resonance`.
    """

    c: float
    omega: float
    delta: float = 0.0
    q: SequenceFamily = field(default_factory=SequenceFamily.zero)

    def __post_init__(self):
        for name in ("c", "omega", "delta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if isinstance(self.q, str):
            object.__setattr__(self, "q", SequenceFamily.parse(self.q))

    @classmethod
    def free(cls, q: SequenceFamily | None = None, omega: float = math.pi / 4) -> "PotentialParams":
        return cls(0.0, omega, 0.0, q if q is not None else SequenceFamily.zero())

    # -- normalized form:  c sin(2 w n + d) = |c| sin(2 w1 n + d1) -------
    @property
    def is_free(self) -> bool:
        return self.c == 0.0

    @property
    def abs_c(self) -> float:
        return abs(self.c)

    @property
    def omega1(self) -> float:
        """``omega`` reduced modulo ``pi`` into ``[0, pi)``."""
        w = self.omega - math.pi * math.floor(self.omega / math.pi)
        # tiny negative omega rounds up to exactly pi
        return 0.0 if w >= math.pi else w

    @property
    def delta1(self) -> float:
        return self.delta + 0.5 * math.pi * (np.sign(self.c) - 1.0)

    @property
    def resonance_ok(self) -> bool:
        x = self.omega / (0.5 * math.pi)
        return self.c != 0.0 and abs(x - round(x)) > 1e-12

    def require_resonance(self):
        if self.c == 0.0:
            raise ParameterError("resonance analysis needs c != 0 (c = 0 is the free operator)")
        if not self.resonance_ok:
            raise ParameterError(
                f"omega = {self.omega!r} violates the standing condition omega not in pi*Z/2"
            )

    @property
    def beta(self) -> float:
        """Resonance strength ``|c| / (4 sin omega1)`` (the GEV growth exponent)."""
        return self.abs_c / (4.0 * math.sin(self.omega1))

    @property
    def critical_lambdas(self) -> tuple[float, float]:
        """``(2 cos omega1, -2 cos omega1)``, i.e. the points ``+-2 cos omega``."""
        w = self.omega1
        return 2.0 * math.cos(w), 2.0 * math.cos(math.pi - w)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {"c": self.c, "omega": self.omega, "delta": self.delta, "q": self.q.spec()}

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialParams":
        q = d.get("q", "zero")
        return cls(float(d["c"]), float(d["omega"]), float(d.get("delta", 0.0)),
                   SequenceFamily.from_dict(q))


@dataclass(frozen=True)
class SpectralPoint:
    lam: float
    phi: float
    z: complex


def lambda_to_point(lam: float) -> SpectralPoint:
    """``lam = 2 cos(phi) = z + 1/z`` with ``phi`` in ``(0, pi)``."""
    lam = float(lam)
    if not -2.0 < lam < 2.0:
        raise DomainError(f"lambda = {lam} is outside the open band (-2, 2)")
    phi = math.acos(0.5 * lam)
    z = complex(0.5 * lam, 0.5 * math.sqrt(4.0 - lam * lam))
    return SpectralPoint(lam, phi, z)


def phi_to_point(phi: float) -> SpectralPoint:
    phi = float(phi)
    if not 0.0 < phi < math.pi:
        raise DomainError(f"phi = {phi} is outside (0, pi)")
    return SpectralPoint(2.0 * math.cos(phi), phi, complex(math.cos(phi), math.sin(phi)))


def _check_phi(phi):
    s = np.sin(phi)
    if np.any(np.asarray(phi) <= 0.0) or np.any(np.asarray(phi) >= math.pi) or np.any(s == 0.0):
        raise DomainError("phi must lie strictly inside (0, pi)")
    return s


# -- potential -------------------------------------------------------------

def potential(p: PotentialParams, start: int, stop: int) -> np.ndarray:
    """``b_n`` for ``n = start, ..., stop - 1``."""
    if start < 1:
        raise DomainError("the potential is indexed from n = 1")
    n = np.arange(start, max(start, stop), dtype=float)
    b = p.q.window(start, stop)
    if p.c != 0.0:
        b = b + p.abs_c * np.sin(2.0 * p.omega1 * n + p.delta1) / n
    return b


def potential_value(p: PotentialParams, n: int) -> float:
    if n < 1:
        raise DomainError("the potential is indexed from n = 1")
    return float(potential(p, n, n + 1)[0])


# -- recurrence -----------------------------------------------------------

def orthogonal_polynomials(p: PotentialParams, lam: float, N: int) -> np.ndarray:
    """``P_1(lam), ..., P_N(lam)`` (array index ``k`` holds ``P_{k+1}``).

    ``P_1 = 1``, ``P_2 = lam - b_1`` and ``P_{n+1} = (lam - b_n) P_n - P_{n-1}``.
    """
    if N < 2:
        raise DomainError("need N >= 2")
    b = potential(p, 1, N)
    return _kernels.three_term(b, float(lam), 0.0, 1.0)


def generalized_eigenvector(p: PotentialParams, lam: float, N: int, u1: float, u2: float) -> np.ndarray:
    """Solution of the bulk recurrence (``n >= 2``) with ``u_1, u_2`` prescribed."""
    if N < 2:
        raise DomainError("need N >= 2")
    b = potential(p, 2, N)
    tail = _kernels.three_term(b, float(lam), float(u1), float(u2))
    return np.concatenate(([float(u1)], tail))


def recurrence_matrix(p: PotentialParams, n, lam: float) -> np.ndarray:
    """``[[0, 1], [-1, lam - b_n]]``: maps ``(u_{n-1}, u_n)`` to ``(u_n, u_{n+1})``."""
    n = np.atleast_1d(np.asarray(n, dtype=int))
    b = _gather(lambda lo, hi: potential(p, lo, hi), n)
    out = mat2(0.0, 1.0, -1.0, lam - b)
    return out[0] if out.shape[0] == 1 else out


# -- variation of parameters ---------------------------------------------

def vop_matrix(n, phi: float) -> np.ndarray:
    """``W_n(phi)``."""
    n = np.asarray(n, dtype=float)
    e = np.exp(1j * phi * n)
    z = np.exp(1j * phi)
    return mat2(np.conj(e), e, np.conj(e) / z, e * z)


def vop_inverse(n, phi: float) -> np.ndarray:
    """``W_n(phi)^{-1}``; ``det W_n = 2 i sin(phi)``."""
    s = _check_phi(phi)
    n = np.asarray(n, dtype=float)
    e = np.exp(1j * phi * n)
    z = np.exp(1j * phi)
    return mat2(e * z, -e, -np.conj(e) / z, np.conj(e)) / (2j * s)


def to_v(u: np.ndarray, phi: float, start: int = 1) -> np.ndarray:
    """Map a solution ``u_start, u_start+1, ...`` to ``v_n`` for each consecutive pair.

    Returns shape ``(len(u) - 1, 2)``; row ``k`` is ``v_{start + k}``.
    """
    s = _check_phi(phi)
    u = np.asarray(u, dtype=float)
    n = np.arange(start, start + len(u) - 1, dtype=float)
    e = np.exp(1j * phi * n)
    z = np.exp(1j * phi)
    a, b = u[:-1], u[1:]
    v1 = (e * z * a - e * b) / (2j * s)
    v2 = (-np.conj(e) / z * a + np.conj(e) * b) / (2j * s)
    return np.stack([v1, v2], axis=-1)


# -- transfer matrices -----------------------------------------------------

def _osc_block(phi, m):
    e2 = np.exp(2j * phi * m)
    return mat2(1.0, e2, -np.conj(e2), -1.0)


def transfer_matrix(p: PotentialParams, n, phi: float) -> np.ndarray:
    """``M_n(phi) = I + b_{n+1}/(2i sin phi) [[1, e^{2i phi (n+1)}], [-e^{-2i phi (n+1)}, -1]]``.

    ``n`` may be an integer or an integer array (result then has a leading axis).
    """
    s = _check_phi(phi)
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(n_arr < 1):
        raise DomainError("transfer matrices are indexed from n = 1")
    m = n_arr + 1
    b = _gather(lambda lo, hi: potential(p, lo, hi), m)
    out = I2 + (b / (2j * s))[:, None, None] * _osc_block(phi, m.astype(float))
    return out[0] if np.ndim(n) == 0 else out


def _gather(window, m: np.ndarray) -> np.ndarray:
    """Evaluate a windowed sequence at arbitrary indices ``m``."""
    m = np.asarray(m, dtype=int)
    lo, hi = int(m.min()), int(m.max()) + 1
    if hi - lo > 4 * len(m) + 64:
        return np.concatenate([window(int(k), int(k) + 1) for k in m])
    return window(lo, hi)[m - lo]


def transfer_matrix_parts(p: PotentialParams, n, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Split ``M_n - I`` into the Wigner-von Neumann part and the ``q`` part.

    The ``q`` part carries ``e^{2 i phi (n+1)}`` off the diagonal, the same as
    ``M_n`` itself, so that ``M_n = I + V + R`` holds identically.
    """
    s = _check_phi(phi)
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    m = n_arr.astype(float) + 1.0
    ac, w1, d1 = p.abs_c, p.omega1, p.delta1
    diag = ac * np.sin(2 * w1 * m + d1) / (2j * m * s)
    k = ac / (4.0 * m * s)
    ep = np.exp(1j * (2 * (phi - w1) * m - d1))
    em = np.exp(1j * (2 * (phi + w1) * m + d1))
    v = mat2(diag, k * (ep - em), k * (np.conj(ep) - np.conj(em)), -diag)
    if p.c == 0.0:
        v = np.zeros_like(v)
    qv = _gather(p.q.window, m.astype(int))
    r = (qv / (2j * s))[:, None, None] * _osc_block(phi, m)
    if np.ndim(n) == 0:
        return v[0], r[0]
    return v, r
