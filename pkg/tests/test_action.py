import numpy as np
import pytest

from dfmlab.action import ActionParams, action_eval, action_gradient, pairing
from dfmlab.checks import action_suite, random_tangent
from dfmlab.errors import InputError
from dfmlab.fields import (ActionTag, FieldBundle, LinkField, ScalarField, dc, gt, perturb,
                           random_bundle, random_group_field)
from dfmlab.lattice import Lattice
from dfmlab.numdiff import central_derivative

P = ActionParams(beta=1.3, mu2=-0.8, lam=0.6)


def test_vacuum_value():
    lat = Lattice((3, 3))
    phi = 1.2 * np.exp(0.4j) * np.ones(9)
    b = FieldBundle(LinkField.identity(lat, "U1"), ScalarField(lat, "U1-complex", phi))
    r2 = 1.44
    assert action_eval(b, P) == pytest.approx(9 * (0.5 * P.mu2 * r2 + 0.25 * P.lam * r2**2), rel=1e-14)


def test_single_link_excitation_hits_two_plaquettes():
    lat = Lattice((3, 3))
    theta = np.zeros((9, 2))
    theta[4, 0] = 0.7
    b = FieldBundle(LinkField(lat, "U1", theta), ScalarField(lat, "U1-complex", np.zeros(9)))
    p = ActionParams(beta=2.0, mu2=0.0, lam=0.0)
    assert action_eval(b, p) == pytest.approx(2 * 2.0 * (1 - np.cos(0.7)), rel=1e-14)


def test_real4_kinetic_normalization_is_half_of_doublet(lat22):
    b = random_bundle(lat22, "SU2", 3, 1.0)
    p = ActionParams(beta=0.0, mu2=0.0, lam=0.0)
    r4 = FieldBundle(b.links, b.scalar.as_rep("SU2-real4"))
    assert action_eval(r4, p) == pytest.approx(0.5 * action_eval(b, p), rel=1e-14)


@pytest.mark.parametrize("kind,rep,dims", [("U1", None, (4, 4)), ("SU2", None, (2, 2)),
                                           ("SU2", "SU2-real4", (3, 2)), ("U1", None, (1,)),
                                           ("SU2", None, (2, 2, 2))])
def test_gauge_invariance_and_gradient(kind, rep, dims):
    lat = Lattice(dims)
    b = random_bundle(lat, kind, 11, 1.0, rep=rep)
    S = action_eval(b, P)
    g = random_group_field(lat, kind, 12, 1.0)
    u = random_group_field(lat, kind, 13, 1.0, ActionTag.DRESSING)
    assert action_eval(gt(b, g), P) == pytest.approx(S, rel=1e-12)
    assert action_eval(dc(b, u), P) == pytest.approx(S, rel=1e-12)
    t = random_tangent(b, 14)
    fd = central_derivative(lambda e: action_eval(perturb(b, t, e), P))
    assert pairing(action_gradient(b, P), t) == pytest.approx(fd, rel=1e-8, abs=1e-9)


def test_action_suite_passes(lat22):
    assert all(c.passed for c in action_suite(lat22, "SU2", 5, 5, P))


def test_parameter_validation():
    with pytest.raises(InputError):
        ActionParams(mu2=-1.0, lam=0.0)
    with pytest.raises(InputError):
        ActionParams(coupling=0.0)
    lat = Lattice((2,))
    vev = ScalarField(lat, "U1-complex", np.ones(2) * 3.0)
    with pytest.raises(InputError):
        ActionParams(mu2=-1.0, lam=1.0, vev_direction=vev)
    ActionParams(mu2=-9.0, lam=1.0, vev_direction=vev)
