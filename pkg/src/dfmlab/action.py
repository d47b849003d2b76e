"""Gauge-invariant lattice action and its analytic gradient.

    S = beta * sum_P (1 - Re tr U_P / dim)
        + w * sum_{x,mu} |U_mu(x) phi(x+mu) - phi(x)|^2
        + sum_x V(phi(x)),      V = mu2/2 |phi|^2 + lam/4 |phi|^4

Conventions (the only place they are fixed): the kinetic weight ``w`` is 1
for complex scalars (U(1) and SU(2) doublets), matching the
``|(d - ieA) phi|^2`` normalization, and 1/2 for the real 4-component
representation, matching ``1/2 (D phi)^T (D phi)``.  ``|phi|^2`` means
``phi^dagger phi`` (resp. ``phi^T phi``).  ``beta`` stands in for the
``-1/4 F^2`` normalization; the coupling only enters through the link
dictionary ``U = exp(-i a g A)`` and is therefore not used here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import groups
from .errors import InputError
from .fields import BundleTangent, FieldBundle, ScalarField


@dataclass(frozen=True)
class ActionParams:
    beta: float = 1.0
    mu2: float = -1.0
    lam: float = 1.0
    coupling: float = 1.0
    # Constant vacuum phi0 for the shifted potential; S itself is unchanged by
    # the shift phi = phi0 + varphi, so this is validated, not used.
    vev_direction: ScalarField | None = None

    def __post_init__(self):
        if self.coupling == 0:
            raise InputError("coupling must be non-zero")
        if self.mu2 < 0 and self.lam <= 0:
            raise InputError("lam must be positive when mu2 < 0 (potential unbounded below)")
        if self.lam < 0:
            raise InputError("lam must be non-negative")
        if self.vev_direction is not None:
            norms = self.vev_direction.norm()
            if not np.allclose(norms, norms[0]):
                raise InputError("vev_direction must be a constant field")
            if self.mu2 < 0 and not np.isclose(norms[0] ** 2, -self.mu2 / self.lam):
                raise InputError("vev_direction does not sit at the minimum of V")


def _kinetic_weight(scalar: ScalarField) -> float:
    return 0.5 if scalar.rep == "SU2-real4" else 1.0


def _scalar_complex(scalar: ScalarField) -> np.ndarray:
    """Scalar as complex array: (N,) for U(1), (N, 2) doublets for SU(2)."""
    return scalar.data if scalar.rep == "U1-complex" else scalar.doublet()


def _transport(kind, u, phi):
    if kind == "U1":
        return np.exp(1j * u) * phi
    return np.einsum("xij,xj->xi", u, phi)


def _plaquettes(b: FieldBundle):
    lat, k, U = b.lattice, b.kind, b.links.data
    for mu in range(lat.ndim):
        for nu in range(mu + 1, lat.ndim):
            xm, xn = lat.shift(mu, 1), lat.shift(nu, 1)
            if k == "U1":
                yield U[:, mu] + U[xm, nu] - U[xn, mu] - U[:, nu]
            else:
                inv = groups.inv("SU2", U[xn, mu]) @ groups.inv("SU2", U[:, nu])
                yield U[:, mu] @ U[xm, nu] @ inv


def _check(b: FieldBundle) -> None:
    if not isinstance(b, FieldBundle):
        raise InputError("action_eval expects a FieldBundle")


def action_eval(b: FieldBundle, p: ActionParams) -> float:
    _check(b)
    lat, k = b.lattice, b.kind
    dim = 1 if k == "U1" else 2
    plaq = 0.0
    for P in _plaquettes(b):
        re_tr = np.cos(P) if k == "U1" else np.real(np.trace(P, axis1=-2, axis2=-1)) / dim
        plaq += np.sum(1.0 - re_tr)
    phi = _scalar_complex(b.scalar)
    w = _kinetic_weight(b.scalar)
    kin = 0.0
    for mu in range(lat.ndim):
        D = _transport(k, b.links.data[:, mu], phi[lat.shift(mu, 1)]) - phi
        kin += np.sum(np.abs(D) ** 2)
    r2 = np.abs(phi) ** 2 if k == "U1" else np.sum(np.abs(phi) ** 2, axis=-1)
    pot = np.sum(0.5 * p.mu2 * r2 + 0.25 * p.lam * r2**2)
    return float(p.beta * plaq + w * kin + pot)


def _staples(b: FieldBundle, mu: int) -> np.ndarray:
    """Sum of staples A with every plaquette through link (x, mu) equal to Re tr(U_mu(x) A)."""
    lat, k, U = b.lattice, b.kind, b.links.data
    n = lat.n_sites
    A = np.zeros(n, dtype=complex) if k == "U1" else np.zeros((n, 2, 2), dtype=complex)
    xm = lat.shift(mu, 1)
    for nu in range(lat.ndim):
        if nu == mu:
            continue
        xn, xmn = lat.shift(nu, 1), lat.shift(nu, -1)
        xm_mn = xm[xmn]  # x + mu - nu
        if k == "U1":
            A += np.exp(1j * (U[xm, nu] - U[xn, mu] - U[:, nu]))
            A += np.exp(1j * (-U[xm_mn, nu] - U[xmn, mu] + U[xmn, nu]))
        else:
            inv = lambda a: groups.inv("SU2", a)  # noqa: E731
            A += U[xm, nu] @ inv(U[xn, mu]) @ inv(U[:, nu])
            A += inv(U[xm_mn, nu]) @ inv(U[xmn, mu]) @ U[xmn, nu]
    return A


def action_gradient(b: FieldBundle, p: ActionParams) -> BundleTangent:
    """Gradient in the chart of ``fields.perturb``: left-trivialized links, additive scalar.

    For complex scalars the returned ``g`` satisfies ``dS = Re sum conj(g) dphi``.
    """
    _check(b)
    lat, k = b.lattice, b.kind
    dim = 1 if k == "U1" else 2
    n, m = lat.n_sites, lat.ndim
    d = groups.algebra_dim(k)
    U = b.links.data
    phi = _scalar_complex(b.scalar)
    w = _kinetic_weight(b.scalar)

    g_links = np.zeros((n, m, d))
    g_phi = np.zeros_like(phi, dtype=complex)
    for mu in range(m):
        xm, xback = lat.shift(mu, 1), lat.shift(mu, -1)
        A = _staples(b, mu)
        fwd = phi[xm]
        Uphi = _transport(k, U[:, mu], fwd)
        D = Uphi - phi
        if k == "U1":
            # d/de Re(e^{i(theta+e)} A) = Re(i e^{i theta} A)
            g_links[:, mu, 0] = -(p.beta / dim) * np.real(1j * np.exp(1j * U[:, mu]) * A)
            g_links[:, mu, 0] += 2 * w * np.real(np.conj(D) * 1j * Uphi)
            back = np.exp(-1j * U[xback, mu]) * D[xback]
        else:
            UA = U[:, mu] @ A
            g_links[:, mu] = -(p.beta / dim) * np.real(
                np.einsum("aij,xji->xa", 1j * groups.PAULI, UA))
            g_links[:, mu] += 2 * w * np.real(
                np.einsum("xi,aij,xj->xa", np.conj(D), 1j * groups.PAULI, Uphi))
            back = np.einsum("xji,xj->xi", np.conj(U[xback, mu]), D[xback])
        g_phi += 2 * w * (back - D)
    r2 = np.abs(phi) ** 2 if k == "U1" else np.sum(np.abs(phi) ** 2, axis=-1)
    pot = p.mu2 + p.lam * r2
    g_phi += (pot if k == "U1" else pot[:, None]) * phi
    if b.scalar.rep == "SU2-real4":
        g_phi = groups.realify(g_phi)
    elif b.scalar.rep == "SU2-doublet":
        g_phi = np.asarray(g_phi)
    return BundleTangent(g_links, g_phi)


def pairing(grad: BundleTangent, t: BundleTangent) -> float:
    """``<grad, t>``: the directional derivative of S along ``t``."""
    links = float(np.sum(grad.links * t.links))
    scalar = float(np.real(np.sum(np.conj(grad.scalar) * t.scalar)))
    return links + scalar
