"""First-order response to deformations of the gauge fixing map.

A deformation ``GF_eps = GF + eps v`` moves the dressing ``u`` along
``u -> u exp(eps frak_u)`` and the dressed configuration ``psi`` by an
infinitesimal gauge transformation ``xi``.  In left-translation coordinates
``xi`` and ``frak_u`` coincide, and both depend on ``psi`` only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import groups
from .action import ActionParams, action_eval, action_gradient, pairing
from .errors import InputError
from .fields import (BundleTangent, FieldBundle, GroupField, dc, ga_apply, gt,
                     tangent_between)
from .fpjacobian import fp_operator, left_log
from .gaugefix import GaugeFixSpec, gf_matrix, gfm_solve
from .numdiff import central_derivative

Direction = Union[float, np.ndarray, Callable[[FieldBundle], np.ndarray]]


@dataclass(frozen=True)
class GfDeformation:
    """``GF_eps(b) = GF(b) + eps * direction``.

    ``direction`` is a constant, an (N, dim G) array, or a callable of the
    dressed configuration returning such an array.
    """

    base: GaugeFixSpec
    direction: Direction = 0.0

    def evaluate(self, psi: FieldBundle) -> np.ndarray:
        n, d = psi.lattice.n_sites, groups.algebra_dim(psi.kind)
        v = self.direction(psi) if callable(self.direction) else self.direction
        v = np.asarray(v, dtype=float)
        if v.ndim == 0 or v.shape == (d,):
            v = np.broadcast_to(v, (n, d))
        v = np.array(v).reshape(n, d)
        if not np.all(np.isfinite(v)):
            raise InputError("deformation direction must be finite")
        return v


class SingularOperatorError(np.linalg.LinAlgError):
    pass


def _solve(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        x = np.linalg.solve(A, rhs.ravel())
    except np.linalg.LinAlgError as exc:
        raise SingularOperatorError("FP operator is singular") from exc
    return x.reshape(rhs.shape)


def dressing_response(deformation: GfDeformation, b: FieldBundle, tol: float = 1e-12, **solve_kw):
    """``frak_u = -A^-1 v`` with ``A`` the FP operator at ``(b, GFM(b))``.

    Returns ``(frak_u, u)`` with ``frak_u`` of shape (N, dim G).
    """
    u, rep = gfm_solve(deformation.base, b, tol, **solve_kw)
    if not rep.converged:
        raise RuntimeError(f"base solve did not converge: {rep}")
    v = deformation.evaluate(dc(b, u))
    return -_solve(fp_operator(deformation.base, b, u).entries, v), u


def dressing_response_fd(deformation: GfDeformation, b: FieldBundle, eps: float = 1e-5,
                         tol: float = 1e-13, **solve_kw) -> np.ndarray:
    """Central difference of ``eps -> GFM_eps(b)`` in left-translation coordinates."""
    u, _ = gfm_solve(deformation.base, b, tol, **solve_kw)
    v = deformation.evaluate(dc(b, u))
    up, _ = gfm_solve(deformation.base, b, tol, offset=eps * v, initial=u, **solve_kw)
    um, _ = gfm_solve(deformation.base, b, tol, offset=-eps * v, initial=u, **solve_kw)
    return (left_log(b.kind, u, up) - left_log(b.kind, u, um)) / (2 * eps)


def xi_from_v(spec: GaugeFixSpec, psi: FieldBundle, v) -> np.ndarray:
    """``xi = -d_G(GF o GA)[psi, e]^-1 v``; needs only the dressed configuration."""
    if not isinstance(v, GfDeformation):
        v = GfDeformation(spec, v)
    return -_solve(gf_matrix(spec, psi), v.evaluate(psi))


# ---------------------------------------------------------------------------
# delta_xi psi
# ---------------------------------------------------------------------------

def _group_exp(kind, lattice, x) -> GroupField:
    return GroupField(lattice, kind, groups.exp(kind, x[:, 0] if kind == "U1" else x))


def _fd_tangent(base: FieldBundle, curve, h: float) -> BundleTangent:
    d = central_derivative(lambda t: tangent_between(base, curve(t)).flat(), h)
    t0 = tangent_between(base, base)
    nl = t0.links.size
    links = d[:nl].reshape(t0.links.shape)
    s = d[nl:]
    if np.iscomplexobj(t0.scalar):
        s = s.reshape(t0.scalar.shape + (2,))
        s = s[..., 0] + 1j * s[..., 1]
    return BundleTangent(links, s.reshape(t0.scalar.shape))


def _delta_ga(psi, xi, h):
    return _fd_tangent(psi, lambda t: ga_apply(psi, _group_exp(psi.kind, psi.lattice, t * xi)), h)


def _delta_dc(b, u, xi, h):
    psi = dc(b, u)
    # xi_tilde = Ad_u xi acts on b before dressing
    xt = xi if b.kind == "U1" else np.einsum("xab,xb->xa", groups.su2_adjoint(u.data), xi)
    return _fd_tangent(psi, lambda t: dc(gt(b, _group_exp(b.kind, b.lattice, t * xt)), u), h)


def _delta_analytic(psi: FieldBundle, xi) -> BundleTangent:
    lat, k = psi.lattice, psi.kind
    links = np.empty((lat.n_sites, lat.ndim, xi.shape[-1]))
    for mu in range(lat.ndim):
        fwd = xi[lat.shift(mu, 1)]
        if k == "U1":
            links[:, mu] = fwd - xi
        else:
            R = groups.su2_adjoint(psi.links.data[:, mu])
            links[:, mu] = np.einsum("xab,xb->xa", R, fwd) - xi
    s = psi.scalar
    if s.rep == "U1-complex":
        scalar = -1j * xi[:, 0] * s.data
    elif s.rep == "SU2-doublet":
        scalar = -1j * np.einsum("xa,aij,xj->xi", xi, groups.PAULI, s.data)
    else:
        scalar = -np.einsum("xa,aij,xj->xi", xi, groups.REAL4_GENERATORS, s.data)
    return BundleTangent(links, scalar)


@dataclass
class DeltaPsiReport:
    tangent: BundleTangent
    deviations: dict      # route name -> sup-norm distance to the gauge-action route
    tol: float
    passed: bool


def delta_psi(b: FieldBundle, u: GroupField, xi, tol: float = 1e-8, h: float = 1e-3) -> DeltaPsiReport:
    """``delta_xi psi`` by three routes: FD of ``ga_apply(psi, exp(t xi))``,
    FD of ``dc(b^{exp(t Ad_u xi)}, u)`` and the closed-form infinitesimal action.
    """
    psi = dc(b, u)
    xi = np.asarray(xi, dtype=float).reshape(psi.lattice.n_sites, groups.algebra_dim(b.kind))
    ref = _delta_ga(psi, xi, h)
    others = {"dressing": _delta_dc(b, u, xi, h), "analytic": _delta_analytic(psi, xi)}
    dev = {name: float(np.max(np.abs(t.flat() - ref.flat()), initial=0.0)) for name, t in others.items()}
    return DeltaPsiReport(ref, dev, tol, all(v <= tol for v in dev.values()))


@dataclass
class InvarianceReport:
    variation: float
    action: float
    bound: float
    passed: bool


def first_order_action_invariance(b: FieldBundle, u: GroupField, xi, p: ActionParams,
                                  rtol: float = 1e-8) -> InvarianceReport:
    """``<grad S(psi), delta_xi psi>`` must vanish."""
    psi = dc(b, u)
    xi = np.asarray(xi, dtype=float).reshape(psi.lattice.n_sites, groups.algebra_dim(b.kind))
    variation = pairing(action_gradient(psi, p), delta_psi(b, u, xi).tangent)
    S = action_eval(psi, p)
    bound = rtol * (1 + abs(S))
    return InvarianceReport(variation, S, bound, abs(variation) <= bound)
