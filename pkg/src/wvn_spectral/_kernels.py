"""Compiled inner loops.

The recurrences are inherently sequential, and the long runs near the
critical points (millions of steps per spectral point) are out of reach for
an interpreted loop.  Everything here is a thin numba loop; all setup and
post-processing stays in numpy.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def three_term(b, lam, u0, u1):
    """Solve ``u_{n+1} = (lam - b_n) u_n - u_{n-1}`` for ``n = 1..len(b)``.

    ``b[k]`` holds ``b_{k+1}``.  Returns ``u_1, ..., u_{len(b)+1}``.
    """
    n_steps = b.shape[0]
    out = np.empty(n_steps + 1)
    prev = u0
    cur = u1
    out[0] = cur
    for k in range(n_steps):
        nxt = (lam - b[k]) * cur - prev
        prev = cur
        cur = nxt
        out[k + 1] = cur
    return out


@njit(cache=True, nogil=True)
def model_chain(p, beta, eps, n_start, n_stop, s, g):
    """Left-multiply ``p`` by ``B_n`` for ``n = n_start .. n_stop - 1``.

    ``B_n = I + (beta/n) K(eps n) + s[n - n_start] g`` where ``K`` is the
    rotation-reflection matrix; ``s`` may be shorter than the range, in which
    case the remainder is zero past its end.
    """
    a11, a12, a21, a22 = p[0, 0], p[0, 1], p[1, 0], p[1, 1]
    g11, g12, g21, g22 = g[0, 0], g[0, 1], g[1, 0], g[1, 1]
    ns = s.shape[0]
    for n in range(n_start, n_stop):
        w = beta / n
        c = w * np.cos(eps * n)
        sn = w * np.sin(eps * n)
        b11 = 1.0 + c + 0j
        b12 = sn + 0j
        b21 = sn + 0j
        b22 = 1.0 - c + 0j
        k = n - n_start
        if k < ns:
            r = s[k]
            if r != 0.0:
                b11 += r * g11
                b12 += r * g12
                b21 += r * g21
                b22 += r * g22
        t11 = b11 * a11 + b12 * a21
        t12 = b11 * a12 + b12 * a22
        t21 = b21 * a11 + b22 * a21
        t22 = b21 * a12 + b22 * a22
        a11, a12, a21, a22 = t11, t12, t21, t22
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = a11
    out[0, 1] = a12
    out[1, 0] = a21
    out[1, 1] = a22
    return out
