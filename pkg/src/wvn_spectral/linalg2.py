"""Closed-form 2x2 complex linear algebra.

Every recursion in the package is carried by 2x2 complex matrices and
2-vectors.  They are plain numpy arrays of shape ``(..., 2, 2)`` and
``(..., 2)`` with dtype ``complex128``; the helpers below broadcast over
any leading axes.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# oscillatory-to-real similarity: [[0, e^{ia}], [e^{-ia}, 0]] = C K(a) C^{-1}
C_SIM = np.array([[1, 1j], [1, -1j]], dtype=complex)
C_SIM_INV = np.linalg.inv(C_SIM)


def mat2(a11, a12, a21, a22) -> np.ndarray:
    """Assemble ``(..., 2, 2)`` arrays from broadcastable entries."""
    a11, a12, a21, a22 = np.broadcast_arrays(
        *(np.asarray(x, dtype=complex) for x in (a11, a12, a21, a22))
    )
    out = np.empty(a11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a21
    out[..., 1, 1] = a22
    return out


def det2(a: np.ndarray) -> np.ndarray:
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def inv2(a: np.ndarray) -> np.ndarray:
    d = det2(a)
    return mat2(a[..., 1, 1], -a[..., 0, 1], -a[..., 1, 0], a[..., 0, 0]) / d[..., None, None]


def fro2(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def rot_refl(theta) -> np.ndarray:
    """``[[cos t, sin t], [sin t, -cos t]]``; a reflection, so it squares to I."""
    c, s = np.cos(theta), np.sin(theta)
    return mat2(c, s, s, -c)


def offdiag_phase(alpha) -> np.ndarray:
    """``[[0, e^{i a}], [e^{-i a}, 0]]``."""
    e = np.exp(1j * np.asarray(alpha, dtype=float))
    return mat2(0.0, e, np.conj(e), 0.0)


def expm2(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of 2x2 matrices by the Cayley-Hamilton closed form.

    ``exp(A) = e^{mu} (cosh(s) I + sinh(s)/s (A - mu I))`` with ``mu = tr A / 2``
    and ``s^2 = -det(A - mu I)``.  No scaling-and-squaring; small ``s`` goes
    through the even Taylor series of ``cosh`` and ``sinh(s)/s``.
    """
    a = np.asarray(a, dtype=complex)
    mu = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
    b = a - mu[..., None, None] * I2
    s2 = b[..., 0, 0] ** 2 + b[..., 0, 1] * b[..., 1, 0]
    s = np.sqrt(s2)
    small = np.abs(s2) < 1e-6
    with np.errstate(invalid="ignore", divide="ignore"):
        ch = np.where(small, 1 + s2 / 2 + s2**2 / 24 + s2**3 / 720, np.cosh(s))
        sh = np.where(small, 1 + s2 / 6 + s2**2 / 120 + s2**3 / 5040, np.sinh(s) / s)
    em = np.exp(mu)
    return em[..., None, None] * (ch[..., None, None] * I2 + sh[..., None, None] * b)


def singular_values2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(sigma_1, sigma_2)`` with ``sigma_1 >= sigma_2``.

    Uses ``sigma_1^2 + sigma_2^2 = |A|_F^2`` and ``sigma_1 sigma_2 = |det A|``;
    the small one is recovered as ``|det| / sigma_1`` to avoid cancellation.
    """
    a = np.asarray(a, dtype=complex)
    f2 = np.sum(np.abs(a) ** 2, axis=(-2, -1))
    d = np.abs(det2(a))
    disc = np.sqrt(np.maximum(f2 * f2 - 4 * d * d, 0.0))
    s1 = np.sqrt(0.5 * (f2 + disc))
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = np.where(s1 > 0, d / np.where(s1 > 0, s1, 1.0), 0.0)
    return s1, np.minimum(s2, s1)


def right_singular_vectors2(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit right-singular vectors ``(v1, v2)`` of a single 2x2 matrix.

    ``v2`` spans the (numerical) kernel when ``a`` has rank one.
    """
    a = np.asarray(a, dtype=complex)
    h = a.conj().T @ a
    p, r, s = h[0, 0].real, h[0, 1], h[1, 1].real
    s1, s2 = singular_values2(a)
    lam2 = float(s2) ** 2
    c1 = np.array([r, lam2 - p], dtype=complex)
    c2 = np.array([lam2 - s, np.conj(r)], dtype=complex)
    v2 = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    nv = np.linalg.norm(v2)
    if nv == 0.0:
        # h is a multiple of I: any basis works
        return np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    v2 = v2 / nv
    v1 = np.array([-np.conj(v2[1]), np.conj(v2[0])])
    return v1, v2
