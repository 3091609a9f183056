import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wvn_spectral import (
    DomainError,
    ParameterError,
    PotentialParams,
    SequenceFamily,
    generalized_eigenvector,
    lambda_to_point,
    orthogonal_polynomials,
    phi_to_point,
    potential,
    potential_value,
    to_v,
    transfer_matrix,
    transfer_matrix_parts,
    vop_inverse,
    vop_matrix,
)

phis = st.floats(0.05, math.pi - 0.05)
cs = st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3)
omegas = st.floats(-7, 7)


def direct_recurrence(b, lam, N):
    # second, plain-Python implementation of P_1..P_N
    P = [1.0, lam - b[0]]
    for n in range(2, N):
        P.append((lam - b[n - 1]) * P[-1] - P[-2])
    return np.array(P[:N])


# -- potential ---------------------------------------------------------------

def test_potential_examples():
    p = PotentialParams(1.0, math.pi / 4)
    assert potential_value(p, 1) == pytest.approx(1.0, abs=1e-15)
    assert potential_value(p, 2) == pytest.approx(0.0, abs=1e-15)


def test_negative_c_equals_shifted_phase():
    a = PotentialParams(-1.0, math.pi / 4)
    b = PotentialParams(1.0, math.pi / 4, -math.pi)
    assert np.allclose(potential(a, 1, 200), potential(b, 1, 200), atol=1e-14)


@given(cs, omegas, st.floats(-7, 7), st.integers(1, 10**6))
def test_normalized_form_matches_raw_formula(c, w, d, n):
    p = PotentialParams(c, w, d)
    assert 0.0 <= p.omega1 < math.pi
    raw = c * math.sin(2 * w * n + d) / n
    # the phase 2 w n loses ~n ulps when reduced, so compare at that scale
    assert potential_value(p, n) == pytest.approx(raw, abs=1e-12 + 4e-16 * abs(c) * abs(w))


def test_q_is_added():
    q = SequenceFamily.geometric(0.5)
    p = PotentialParams(1.0, 1.0, 0.3, q)
    assert np.allclose(potential(p, 1, 10) - potential(PotentialParams(1.0, 1.0, 0.3), 1, 10), q.window(1, 10))


def test_params_round_trip_and_string_q():
    p = PotentialParams(-0.7, 2.0, 0.1, "power:2.5:0.3")
    assert PotentialParams.from_dict(p.to_dict()) == p


def test_resonance_condition():
    PotentialParams(1.0, math.pi / 3).require_resonance()
    for w in (0.0, math.pi / 2, math.pi, -3 * math.pi / 2):
        with pytest.raises(ParameterError, match="pi\\*Z/2"):
            PotentialParams(1.0, w).require_resonance()
    with pytest.raises(ParameterError):
        PotentialParams.free().require_resonance()


def test_nonfinite_params_rejected():
    with pytest.raises(ParameterError):
        PotentialParams(float("nan"), 1.0)


def test_beta_and_critical_lambdas():
    p = PotentialParams(1.0, math.pi / 4)
    assert p.beta == pytest.approx(1 / (2 * math.sqrt(2)))
    assert p.critical_lambdas == pytest.approx((math.sqrt(2), -math.sqrt(2)))
    # omega shifted by pi and c sign flipped describe the same operator
    q = PotentialParams(-1.0, math.pi / 4 + math.pi, math.pi)
    assert q.beta == pytest.approx(p.beta)
    assert np.allclose(potential(p, 1, 50), potential(q, 1, 50), atol=1e-13)


# -- coordinates -------------------------------------------------------------

@pytest.mark.parametrize("lam, phi", [(0.0, math.pi / 2), (math.sqrt(2), math.pi / 4), (2 * math.cos(1.0), 1.0)])
def test_lambda_to_point_examples(lam, phi):
    pt = lambda_to_point(lam)
    assert pt.phi == pytest.approx(phi, abs=1e-12)
    assert abs(pt.z) == pytest.approx(1.0)
    assert (pt.z + 1 / pt.z).real == pytest.approx(lam)


def test_lambda_zero_is_i():
    assert lambda_to_point(0.0).z == pytest.approx(1j)


@given(phis)
def test_lambda_phi_round_trip(phi):
    assert lambda_to_point(2 * math.cos(phi)).phi == pytest.approx(phi, abs=1e-12)
    assert phi_to_point(phi).lam == pytest.approx(2 * math.cos(phi))


@pytest.mark.parametrize("lam", [-2.0, 2.0, 3.1, float("nan")])
def test_lambda_out_of_band(lam):
    with pytest.raises(DomainError):
        lambda_to_point(lam)


# -- recurrence ----------------------------------------------------------------

def test_free_polynomial_examples():
    P = orthogonal_polynomials(PotentialParams.free(), 0.0, 5)
    assert P[:3] == pytest.approx([1.0, 0.0, -1.0])
    # lam = 1, phi = pi/3: sin(n pi/3) / sin(pi/3) = 1, 1, 0, -1, -1, 0
    assert orthogonal_polynomials(PotentialParams.free(), 1.0, 6) == pytest.approx([1, 1, 0, -1, -1, 0], abs=1e-14)


@given(phis)
def test_free_chebyshev_closed_form(phi):
    P = orthogonal_polynomials(PotentialParams.free(), 2 * math.cos(phi), 10**4)
    n = np.arange(1, 10**4 + 1)
    assert np.allclose(P, np.sin(n * phi) / math.sin(phi), atol=1e-9)


def test_recurrence_against_direct_oracle():
    p = PotentialParams(1.0, math.pi / 4)
    b = potential(p, 1, 11)
    assert np.allclose(orthogonal_polynomials(p, 0.5, 10), direct_recurrence(b, 0.5, 10), atol=1e-12)


def test_generalized_eigenvector_initial_data():
    p = PotentialParams(1.0, 1.0)
    u = generalized_eigenvector(p, 0.3, 20, 2.0, -1.0)
    assert u[:2] == pytest.approx([2.0, -1.0])
    b = potential(p, 1, 21)
    for n in range(2, 19):
        assert u[n - 2] + b[n - 1] * u[n - 1] + u[n] == pytest.approx(0.3 * u[n - 1])


@given(cs, st.floats(0.1, 3.0), st.floats(-1.9, 1.9))
def test_wronskian_constant(c, w, lam):
    p = PotentialParams(c, w, 0.4, SequenceFamily.geometric(0.6))
    u = generalized_eigenvector(p, lam, 5000, 1.0, 0.0)
    v = generalized_eigenvector(p, lam, 5000, 0.0, 1.0)
    wr = u[1:] * v[:-1] - u[:-1] * v[1:]
    assert np.allclose(wr, wr[0], atol=1e-10 * max(1.0, np.abs(u).max() * np.abs(v).max()))


# -- transfer matrices -------------------------------------------------------

@given(cs, omegas, st.floats(-3, 3), phis, st.integers(1, 10**6))
def test_det_transfer_matrix_is_one(c, w, d, phi, n):
    M = transfer_matrix(PotentialParams(c, w, d), n, phi)
    # rounding in a 2x2 determinant scales with the squared entry size
    assert abs(np.linalg.det(M) - 1.0) < 1e-14 * max(1.0, np.abs(M).max() ** 2)


def test_transfer_matrix_identity_when_b_vanishes():
    # b_{n+1} = sin(pi (n+1)/2) / (n+1) vanishes for odd n
    assert np.allclose(transfer_matrix(PotentialParams(1.0, math.pi / 4), 3, 1.0), np.eye(2), atol=1e-15)


@given(phis)
def test_transfer_matrix_parts_sum(phi):
    p = PotentialParams(0.8, 1.1, 0.2, SequenceFamily.power(2.0, 0.5))
    n = np.arange(1, 400)
    V, R = transfer_matrix_parts(p, n, phi)
    assert np.allclose(np.eye(2) + V + R, transfer_matrix(p, n, phi), atol=1e-15)


@pytest.mark.parametrize("phi", [0.0, math.pi, -0.1])
def test_transfer_matrix_rejects_band_edges(phi):
    with pytest.raises(DomainError):
        transfer_matrix(PotentialParams(1.0, 1.0), 1, phi)


def test_vop_inverse():
    n = np.arange(1, 30)
    assert np.allclose(vop_inverse(n, 0.7) @ vop_matrix(n, 0.7), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("c, w, lam", [(1.0, math.pi / 4, 0.5), (-2.0, 2.2, -1.1), (0.5, math.pi / 5, 1.6)])
def test_two_path_consistency(c, w, lam):
    """Propagating v through M_n reproduces the recurrence solution."""
    p = PotentialParams(c, w, 0.3, SequenceFamily.geometric(0.5))
    phi = lambda_to_point(lam).phi
    N = 10**4
    P = orthogonal_polynomials(p, lam, N + 1)
    M = transfer_matrix(p, np.arange(1, N), phi)
    v = to_v(P[:2], phi)[0]
    out = [v]
    for k in range(N - 1):
        v = M[k] @ v
        out.append(v)
    W = vop_matrix(np.arange(1, N + 1), phi)
    u = np.einsum("nij,nj->ni", W, np.array(out))
    assert np.allclose(u[:, 0].imag, 0, atol=1e-10)
    assert np.allclose(u[:, 0].real, P[:N], atol=1e-10)
    assert np.allclose(u[:, 1].real, P[1:N + 1], atol=1e-10)
