import numpy as np
import pytest

from dfmlab import gaugefix, groups
from dfmlab.errors import BranchError, DegenerateInputError, InputError
from dfmlab.fields import (ActionTag, FieldBundle, GroupField, LinkField, ScalarField, dc, random_bundle,
                           random_group_field)
from dfmlab.gaugefix import (Lorenz, RxiAbelian, RxiNonAbelian, Unitary, check_gfm_equivariance, gf_eval,
                             gf_matrix, gfm_solve, locality_profile, loglog_slope, unitary_dressing,
                             xi_sweep)
from dfmlab.gaugefix import _fd_matrix
from dfmlab.lattice import Lattice


def u1_bundle(lat, theta, phi):
    return FieldBundle(LinkField(lat, "U1", theta), ScalarField(lat, "U1-complex", phi))


def test_lorenz_on_identity_links_is_zero(lat22):
    b = random_bundle(lat22, "SU2", 1, 1.0)
    b = FieldBundle(LinkField.identity(lat22, "SU2"), b.scalar)
    assert np.all(gf_eval(Lorenz(), b) == 0)


def test_rxi_abelian_constant_mode():
    lat = Lattice((3, 2))
    b = u1_bundle(lat, np.full((6, 2), 0.3), np.exp(0.7j) * np.ones(6))
    np.testing.assert_allclose(gf_eval(RxiAbelian(xi=1.0), b), -0.7, atol=1e-15)


def test_rxi_nonabelian_vanishes_at_vacuum(lat22):
    spec = RxiNonAbelian(xi=3.0)
    b = FieldBundle(LinkField.identity(lat22, "SU2"), ScalarField(lat22, "SU2-real4", np.tile(spec.phi0, (4, 1))))
    assert np.all(gf_eval(spec, b) == 0.0)


def test_divergence_matches_hand_computation():
    lat = Lattice((3,))
    b = u1_bundle(lat, np.array([[0.1], [0.4], [-0.2]]), np.ones(3))
    # -[c(x) - c(x-1)] with periodic wrap
    np.testing.assert_allclose(gf_eval(Lorenz(), b)[:, 0], [-(0.1 + 0.2), -(0.4 - 0.1), -(-0.2 - 0.4)])


@pytest.mark.parametrize("kind,spec,dims", [
    ("U1", RxiAbelian(1.3, 1.1, 0.9), (3, 3)), ("U1", Lorenz(), (4,)), ("U1", Unitary(), (3, 2)),
    ("SU2", RxiNonAbelian(0.7, 1.2), (2, 2)), ("SU2", Lorenz(), (3,)), ("SU2", Unitary(), (2, 2)),
])
def test_linearization_matches_finite_differences(kind, spec, dims):
    b = random_bundle(Lattice(dims), kind, 7, 0.6)
    np.testing.assert_allclose(gf_matrix(spec, b), _fd_matrix(spec, b), atol=1e-9)


def fourier_oracle(n, m, k):
    """Amplitude of the screened-Poisson response to chi = cos(2 pi k x / n)."""
    k2 = 4 * np.sin(np.pi * k / n) ** 2
    return m / (k2 + m)


@pytest.mark.parametrize("n,k,m", [(4, 1, 2.0), (8, 3, 0.5), (6, 2, 7.0)])
def test_single_mode_solve(n, k, m):
    lat = Lattice((n,))
    chi = 0.8 * np.cos(2 * np.pi * k * np.arange(n) / n)
    b = u1_bundle(lat, np.zeros((n, 1)), np.exp(1j * chi))
    u, rep = gfm_solve(RxiAbelian(xi=m), b, 1e-12)
    assert rep.converged and rep.method == "spectral"
    np.testing.assert_allclose(u.data, fourier_oracle(n, m, k) * chi, atol=1e-13)


def test_unitary_closed_forms():
    lat = Lattice((2,))
    b = u1_bundle(lat, np.zeros((2, 1)), np.array([2 * np.exp(0.3j), 0.5 * np.exp(-1.1j)]))
    u, _ = gfm_solve(Unitary(), b)
    np.testing.assert_allclose(u.data, [0.3, -1.1], atol=1e-15)
    psi = dc(b, u).scalar.data
    np.testing.assert_allclose(psi.imag, 0, atol=1e-15)
    assert np.all(psi.real > 0)

    lat = Lattice((2,))
    phi = np.array([[0, 1.5], [2.0, 0]], dtype=complex)
    b = FieldBundle(LinkField.identity(lat, "SU2"), ScalarField(lat, "SU2-doublet", phi))
    u = unitary_dressing(b)
    np.testing.assert_allclose(u.data[0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(u.data[1], [[0, 1], [-1, 0]], atol=1e-15)


def test_degenerate_and_branch_errors():
    lat = Lattice((2,))
    with pytest.raises(DegenerateInputError):
        gfm_solve(Unitary(), u1_bundle(lat, np.zeros((2, 1)), np.array([1.0, 0.0])))
    with pytest.raises(BranchError):
        gf_eval(Lorenz(), u1_bundle(lat, np.full((2, 1), np.pi), np.ones(2)))
    with pytest.raises(InputError):
        gf_eval(RxiNonAbelian(1.0), random_bundle(lat, "U1", 1, 1.0))
    with pytest.raises(InputError):
        RxiAbelian(xi=-1.0)


def test_lorenz_ideality_violation_is_reported():
    lat = Lattice((4,))
    b = u1_bundle(lat, np.zeros((4, 1)), np.ones(4))
    _, rep = gfm_solve(Lorenz(), b, offset=0.3)
    assert rep.ideality_violation and not rep.converged
    _, rep = gfm_solve(Lorenz(), random_bundle(lat, "U1", 3, 0.5))
    assert rep.converged and not rep.ideality_violation


def test_newton_with_fd_jacobian(lat22):
    b = random_bundle(lat22, "SU2", 4, 0.5)
    ua, ra = gfm_solve(RxiNonAbelian(1.0), b, 1e-11)
    uf, rf = gfm_solve(RxiNonAbelian(1.0), b, 1e-11, jacobian="fd")
    assert ra.converged and rf.converged
    assert np.max(groups.distance("SU2", ua.data, uf.data)) < 1e-9


def test_max_iter_reports_nonconvergence(lat22):
    b = random_bundle(lat22, "SU2", 4, 1.0)
    _, rep = gfm_solve(RxiNonAbelian(1.0), b, 1e-14, max_iter=1)
    assert not rep.converged and rep.iterations == 1


@pytest.mark.parametrize("kind,spec,tol", [("U1", RxiAbelian(1.0), 1e-10), ("U1", Unitary(), 1e-10),
                                           ("SU2", RxiNonAbelian(1.0), 1e-8), ("SU2", Unitary(), 1e-8)])
def test_equivariance(kind, spec, tol):
    lat = Lattice((4, 4) if kind == "U1" else (2, 2))
    b = random_bundle(lat, kind, 21, 0.7)
    r = check_gfm_equivariance(spec, b, random_group_field(lat, kind, 22, 1.0), 10 * tol, tol)
    assert r.conclusive and r.passed
    r = check_gfm_equivariance(spec, b, GroupField.identity(lat, kind), 10 * tol, tol)
    assert r.distance == 0.0


def test_xi_sweep_single_mode_and_v_independence():
    lat = Lattice((4,))
    chi = np.cos(2 * np.pi * np.arange(4) / 4)
    b = u1_bundle(lat, np.zeros((4, 1)), np.exp(1j * chi))
    rows = xi_sweep(RxiAbelian(xi=1.0), b, [2, 20, 200])
    np.testing.assert_allclose([r.distance for r in rows], [2 / 4, 2 / 22, 2 / 202], atol=1e-12)
    rows2 = xi_sweep(RxiAbelian(xi=1.0, v=2.0), b, [1, 10, 100])
    np.testing.assert_allclose([r.distance for r in rows2], [r.distance for r in rows], atol=1e-12)
    m = np.array([2.0, 20.0, 200.0])
    expected = np.polyfit(np.log(m), np.log(2 / (2 + m)), 1)[0]
    assert loglog_slope(rows) == pytest.approx(expected, abs=1e-10)


def test_locality_profiles(lat44):
    b = random_bundle(lat44, "U1", 5, 0.5)
    prof = locality_profile(Unitary(), b, 5, 1e-3)
    assert prof.scalar[0, 1] > 1e-4
    assert np.all(prof.scalar[1:, 1] <= 1e-12) and np.all(prof.links[:, 1] <= 1e-12)
    prof = locality_profile(RxiAbelian(1.0), b, 5, 1e-3)
    assert prof.scalar[1, 1] > 1e-8 and prof.links[1, 1] > 1e-8


def test_su2_continuation_recovers_stalled_solve():
    lat = Lattice((2, 2))
    b = random_bundle(lat, "SU2", 37, 1.5)
    spec = RxiNonAbelian(0.3)
    _, cold = gaugefix._newton(spec, b, np.zeros((4, 3)), 1e-8, 50, "analytic", None)
    assert not cold.converged
    u, rep = gfm_solve(spec, b, 1e-8)
    assert rep.converged and rep.method.endswith("+continuation")
    assert np.max(np.abs(gf_eval(spec, dc(b, u)))) <= 1e-8
    r = check_gfm_equivariance(spec, b, random_group_field(lat, "SU2", 38, 1.5), 1e-7, 1e-8)
    assert r.conclusive and r.passed
