import numpy as np
import pytest

from dfmlab.action import ActionParams
from dfmlab.fields import ActionTag, FieldBundle, LinkField, ScalarField, dc, gauge_act, gt, random_bundle, \
    random_group_field
from dfmlab.gaugefix import RxiAbelian, RxiNonAbelian
from dfmlab.lattice import Lattice
from dfmlab.variations import (GfDeformation, delta_psi, dressing_response, dressing_response_fd,
                               first_order_action_invariance, xi_from_v)


@pytest.mark.parametrize("kind,spec,dims", [("U1", RxiAbelian(1.3), (3, 3)), ("SU2", RxiNonAbelian(0.8), (2, 2))])
def test_dressing_response_matches_two_solves(kind, spec, dims):
    lat = Lattice(dims)
    b = random_bundle(lat, kind, 4, 0.6)
    v = np.random.default_rng(2).normal(size=(lat.n_sites, 1 if kind == "U1" else 3))
    D = GfDeformation(spec, v)
    resp, u = dressing_response(D, b)
    np.testing.assert_allclose(resp, dressing_response_fd(D, b), atol=1e-8)
    np.testing.assert_allclose(xi_from_v(spec, dc(b, u), v), resp, atol=1e-12)


def test_zero_deformation(lat22):
    b = random_bundle(lat22, "SU2", 4, 0.6)
    resp, _ = dressing_response(GfDeformation(RxiNonAbelian(1.0), 0.0), b)
    assert np.all(resp == 0)


def test_constant_offset_abelian():
    lat = Lattice((4, 2))
    b = random_bundle(lat, "U1", 4, 0.6)
    m, c = 2.5, 0.3
    resp, u = dressing_response(GfDeformation(RxiAbelian(m), c), b)
    # (-Lap + m) xi = -c has the constant solution -c / m
    np.testing.assert_allclose(resp, -c / m, atol=1e-14)
    np.testing.assert_allclose(xi_from_v(RxiAbelian(m), dc(b, u), c), -c / m, atol=1e-14)


def test_callable_direction(lat22):
    b = random_bundle(lat22, "U1", 4, 0.6)
    D = GfDeformation(RxiAbelian(1.0), lambda psi: np.abs(psi.scalar.data)[:, None])
    resp, _ = dressing_response(D, b)
    np.testing.assert_allclose(resp, dressing_response_fd(D, b), atol=1e-8)


@pytest.mark.parametrize("kind", ["U1", "SU2"])
def test_xi_depends_on_psi_only(lat22, kind):
    spec = RxiAbelian(1.0) if kind == "U1" else RxiNonAbelian(1.0)
    b = random_bundle(lat22, kind, 4, 0.6)
    u = random_group_field(lat22, kind, 5, 1.0, ActionTag.DRESSING)
    g = random_group_field(lat22, kind, 6, 1.0)
    v = np.random.default_rng(0).normal(size=(4, 1 if kind == "U1" else 3))
    np.testing.assert_allclose(xi_from_v(spec, dc(gt(b, g), gauge_act(u, g)), v), xi_from_v(spec, dc(b, u), v),
                               atol=1e-8)


@pytest.mark.parametrize("kind,rep", [("U1", None), ("SU2", None), ("SU2", "SU2-real4")])
def test_delta_psi_routes(lat22, kind, rep):
    b = random_bundle(lat22, kind, 4, 0.8, rep=rep)
    u = random_group_field(lat22, kind, 5, 1.0, ActionTag.DRESSING)
    xi = np.random.default_rng(0).normal(size=(4, 1 if kind == "U1" else 3))
    r = delta_psi(b, u, xi)
    assert r.passed, r.deviations
    zero = delta_psi(b, u, np.zeros_like(xi))
    assert zero.tangent.sup() <= 1e-15


def test_constant_u1_direction_leaves_links_fixed(lat22):
    b = random_bundle(lat22, "U1", 4, 0.8)
    u = random_group_field(lat22, "U1", 5, 1.0, ActionTag.DRESSING)
    r = delta_psi(b, u, np.full((4, 1), 0.7))
    assert np.max(np.abs(r.tangent.links)) < 1e-12


@pytest.mark.parametrize("kind,dims", [("U1", (4, 4)), ("SU2", (2, 2))])
def test_first_order_action_invariance(kind, dims):
    lat = Lattice(dims)
    b = random_bundle(lat, kind, 4, 0.8)
    u = random_group_field(lat, kind, 5, 1.0, ActionTag.DRESSING)
    xi = np.random.default_rng(0).normal(size=(lat.n_sites, 1 if kind == "U1" else 3))
    p = ActionParams(beta=1.1, mu2=-0.5, lam=0.4)
    r = first_order_action_invariance(b, u, xi, p)
    assert r.passed
    assert abs(first_order_action_invariance(b, u, 0 * xi, p).variation) <= 1e-15
