"""Randomized identity suites shared by the CLI and the acceptance tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import ActionParams, action_eval, action_gradient, pairing
from .errors import TagError
from .fields import (ActionTag, BundleTangent, GroupField, IOTA_TABLE, MU_TABLE, dc,
                     field_distance, gauge_act, gt, iota, mu, perturb, random_bundle,
                     random_group_field, udc, zero_tangent)
from .numdiff import central_derivative


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    @classmethod
    def at_most(cls, name, value, tol):
        value = float(value)
        return cls(name, value, tol, bool(value <= tol))


def _seeds(seed: int, n: int, k: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(n * k, dtype=np.uint64).reshape(n, k)


def composer_identities(b, g1, g2, u):
    """Deviation of each field-composer identity for one configuration."""
    k = b.kind
    v = iota(u)
    psi = dc(b, u)
    return {
        "gt_composition": field_distance(gt(gt(b, g1), g2), gt(b, mu(g1, g2))),
        "dc_invariance": field_distance(dc(gt(b, g1), gauge_act(u, g1)), psi),
        "udc_equivariance": field_distance(udc(psi, gauge_act(v, g1)), gt(udc(psi, v), g1)),
        "dc_shift": field_distance(dc(gt(b, g1), u), dc(b, mu(g1, u))),
        "udc_dc_roundtrip": field_distance(udc(psi, v), b),
        "dressing_law": field_distance(gauge_act(u, g1),
                                       GroupField(b.lattice, k, mu(iota(g1), u).data, ActionTag.DRESSING)),
    }


def composer_tables_ok(lattice, kind) -> bool:
    """mu and iota accept exactly their admissible tag pairs."""
    tags = [ActionTag.ADJOINT, ActionTag.DRESSING, ActionTag.UNDRESSING, ActionTag.TRIVIAL]
    fields_ = {t: GroupField.identity(lattice, kind, t) for t in tags}
    for t1 in tags:
        for t2 in tags:
            try:
                out = mu(fields_[t1], fields_[t2])
                if MU_TABLE.get((t1, t2)) is not out.tag:
                    return False
            except TagError:
                if (t1, t2) in MU_TABLE:
                    return False
        try:
            if IOTA_TABLE.get(t1) is not iota(fields_[t1]).tag:
                return False
        except TagError:
            if t1 in IOTA_TABLE:
                return False
    return True


def composer_suite(lattice, kind, seed: int, n: int, spread: float = 1.0, tol: float = 1e-12):
    worst = {}
    for s in _seeds(seed, n, 4):
        b = random_bundle(lattice, kind, int(s[0]), spread)
        g1 = random_group_field(lattice, kind, int(s[1]), spread)
        g2 = random_group_field(lattice, kind, int(s[2]), spread)
        u = random_group_field(lattice, kind, int(s[3]), spread, ActionTag.DRESSING)
        for name, dev in composer_identities(b, g1, g2, u).items():
            worst[name] = max(worst.get(name, 0.0), dev)
    checks = [Check.at_most(name, dev, tol) for name, dev in worst.items()]
    ok = composer_tables_ok(lattice, kind)
    checks.append(Check("mu_iota_tables", 0.0 if ok else 1.0, 0.0, ok))
    return checks


def random_tangent(b, seed: int) -> BundleTangent:
    rng = np.random.default_rng(seed)
    t = zero_tangent(b)
    s = rng.normal(size=t.scalar.shape)
    if np.iscomplexobj(t.scalar):
        s = s + 1j * rng.normal(size=t.scalar.shape)
    return BundleTangent(rng.normal(size=t.links.shape), s)


def action_suite(lattice, kind, seed: int, n: int, params: ActionParams, spread: float = 1.0,
                 rep=None, rtol: float = 1e-10, grad_tol: float = 1e-6):
    worst_gt = worst_dc = worst_grad = 0.0
    for s in _seeds(seed, n, 4):
        b = random_bundle(lattice, kind, int(s[0]), spread, rep=rep)
        g = random_group_field(lattice, kind, int(s[1]), spread)
        u = random_group_field(lattice, kind, int(s[2]), spread, ActionTag.DRESSING)
        S = action_eval(b, params)
        scale = max(1.0, abs(S))
        worst_gt = max(worst_gt, abs(action_eval(gt(b, g), params) - S) / scale)
        worst_dc = max(worst_dc, abs(action_eval(dc(b, u), params) - S) / scale)
        t = random_tangent(b, int(s[3]))
        fd = central_derivative(lambda e: action_eval(perturb(b, t, e), params))
        an = pairing(action_gradient(b, params), t)
        worst_grad = max(worst_grad, abs(fd - an) / max(1.0, abs(fd)))
    return [Check.at_most("S_gt_invariance", worst_gt, rtol),
            Check.at_most("S_dc_invariance", worst_dc, rtol),
            Check.at_most("gradient_vs_fd", worst_grad, grad_tol)]
