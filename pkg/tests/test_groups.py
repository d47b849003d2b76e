import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from dfmlab import groups
from dfmlab.errors import BranchError, InputError

coeffs = st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3).map(np.array)


@given(coeffs)
@settings(max_examples=100, deadline=None)
def test_su2_exp_matches_expm(c):
    ref = expm(1j * np.einsum("a,aij->ij", c, groups.PAULI))
    np.testing.assert_allclose(groups.su2_exp(c), ref, atol=1e-12)


@given(coeffs.filter(lambda c: np.linalg.norm(c) < np.pi - 1e-3))
@settings(max_examples=100, deadline=None)
def test_log_exp_roundtrip(c):
    np.testing.assert_allclose(groups.su2_log(groups.su2_exp(c)), c, atol=1e-11)


def test_log_of_minus_identity_is_branch_error():
    with pytest.raises(BranchError):
        groups.su2_log(-groups.ID2)


def test_adjoint_matrix_definition(rng):
    u = groups.su2_exp(rng.normal(size=3))
    y = rng.normal(size=3)
    lhs = u @ np.einsum("a,aij->ij", y, groups.PAULI) @ u.conj().T
    rhs = np.einsum("a,aij->ij", groups.su2_adjoint(u) @ y, groups.PAULI)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


@pytest.mark.parametrize("scale", [1e-6, 0.3, 1.5, 2.9])
def test_dlog_right_against_finite_differences(rng, scale):
    c = rng.normal(size=3)
    c *= scale / np.linalg.norm(c)
    d = rng.normal(size=3)
    h = 1e-5
    fd = (groups.su2_log(groups.su2_exp(c) @ groups.su2_exp(h * d))
          - groups.su2_log(groups.su2_exp(c) @ groups.su2_exp(-h * d))) / (2 * h)
    np.testing.assert_allclose(groups.su2_dlog_right(c) @ d, fd, atol=1e-8)


def test_real4_representation_is_a_homomorphism(rng):
    c = rng.normal(size=3)
    T = groups.REAL4_GENERATORS
    np.testing.assert_allclose(groups.realify_matrix(groups.su2_exp(c)), expm(np.einsum("a,aij->ij", c, T)),
                               atol=1e-12)
    assert np.array_equal(T, -np.swapaxes(T, 1, 2))


def test_antisym_form_vanishes_on_the_diagonal(rng):
    x = rng.normal(size=(5, 4))
    for T in groups.REAL4_GENERATORS:
        assert np.all(groups.antisym_form(T, x, x) == 0.0)


def test_su2_from_column():
    np.testing.assert_allclose(groups.su2_from_column(np.array([0, 1])), [[0, -1], [1, 0]])
    w = np.array([0.6, 0.8j])
    u = groups.su2_from_column(w)
    assert groups.su2_unitarity_defect(u) < 1e-15
    np.testing.assert_allclose(u[:, 0], w)


def test_wrap_angle():
    np.testing.assert_allclose(groups.wrap_angle([3 * np.pi, -np.pi, 0.5]), [np.pi, np.pi, 0.5])
    x = np.array([0.1, -3.0, 3.14])
    assert groups.wrap_angle(x).tobytes() == x.tobytes()


def test_group_element_api():
    x = groups.AlgebraElement("SU2", [0.1, -0.2, 0.3])
    g = groups.exp_map(x)
    np.testing.assert_allclose(groups.log_map(g).data, x.data, atol=1e-14)
    e = g @ g.inverse()
    np.testing.assert_allclose(e.data, groups.ID2, atol=1e-14)
    assert groups.log_map(groups.exp_map(groups.AlgebraElement("U1", [4.0]))).data[0] == pytest.approx(4.0 - 2 * np.pi)


def test_invalid_inputs():
    with pytest.raises(InputError):
        groups.check_kind("SU3")
    with pytest.raises(InputError):
        groups.GroupElement("SU2", 2 * groups.ID2)
    with pytest.raises(InputError):
        groups.AlgebraElement("SU2", [1.0, np.nan, 0.0])
