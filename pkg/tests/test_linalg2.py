import numpy as np
import scipy.linalg
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from wvn_spectral.linalg2 import det2, expm2, inv2, right_singular_vectors2, rot_refl, singular_values2

finite = st.floats(-3, 3, allow_nan=False)
mats = arrays(complex, (2, 2), elements=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))


@given(mats)
def test_expm2_matches_scipy(a):
    assert np.allclose(expm2(a), scipy.linalg.expm(a), rtol=1e-10, atol=1e-10)


def test_expm2_small_argument_branch():
    a = np.array([[1e-5, 2e-6j], [0, -1e-5]])
    assert np.allclose(expm2(a), scipy.linalg.expm(a), rtol=1e-15, atol=1e-16)


@given(mats)
def test_singular_values2(a):
    s1, s2 = singular_values2(a)
    ref = np.linalg.svd(a, compute_uv=False)
    assert np.isclose(s1, ref[0], atol=1e-12)
    assert np.isclose(s2, ref[1], atol=1e-10 * max(1.0, ref[0]))


@given(mats)
def test_kernel_vector_is_least_stretched(a):
    v1, v2 = right_singular_vectors2(a)
    s1, s2 = np.linalg.svd(a, compute_uv=False)
    assert np.isclose(np.linalg.norm(a @ v2), s2, atol=1e-8 * max(1.0, s1))
    assert abs(np.vdot(v1, v2)) < 1e-10


@given(mats)
def test_det_and_inverse(a):
    assert np.isclose(det2(a), np.linalg.det(a), atol=1e-10)
    if abs(det2(a)) > 1e-3:
        assert np.allclose(inv2(a) @ a, np.eye(2), atol=1e-9)


@given(finite)
def test_rotation_reflection_is_an_involution(t):
    k = rot_refl(t)
    assert np.allclose(k @ k, np.eye(2))
    assert np.isclose(np.linalg.det(k), -1)
