"""Gauge fixing maps and the dressing fields that solve them.

A gauge fixing map ``GF`` sends a bundle to a per-site algebra-valued array
of shape ``(N, dim G)``.  ``gfm_solve`` finds ``u`` with
``GF(dc(b, u)) = 0`` and returns it tagged as a dressing field.

Lattice conventions.  The divergence of a connection is taken in link-angle
units with backward differences,

    div(b)(x) = -sum_mu [c_mu(x) - c_mu(x - mu)],   c = log U,

which equals ``g a^2 d^mu A_mu`` under ``U = exp(-i a g A)``.  Dressing with
``u = exp(i alpha)`` then changes it by ``-Lap alpha`` exactly, so the abelian
R_xi condition ``div - m chi = 0`` becomes

    (Lap - m) alpha = div - m chi,      m = e v xi,

with the standard (2 ndim + 1)-point periodic Laplacian ``Lap``.  The
non-abelian map is ``div^a - m (phi - phi0)^T T^a phi0`` with ``m = g xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import groups
from .errors import BranchError, DegenerateInputError, InputError
from .numdiff import central_jacobian
from .fields import (ActionTag, FieldBundle, GroupField, ScalarField, dc,
                     field_distance, ga_apply, gt, perturb, zero_tangent)

# Link logs / phases this close to +-pi are rejected instead of wrapped.
BRANCH_MARGIN = 1e-6
DEFAULT_PHI0 = np.array([0.0, 0.0, 1.0, 0.0])  # doublet (0, 1)


# ---------------------------------------------------------------------------
# Specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lorenz:
    """``GF = div A``; not ideal (constant gauge transformations are zero modes)."""


@dataclass(frozen=True)
class RxiAbelian:
    xi: float
    v: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if not self.xi > 0 or not self.v > 0 or self.e == 0:
            raise InputError("RxiAbelian needs xi > 0, v > 0 and e != 0")

    @property
    def mass(self) -> float:
        return self.e * self.v * self.xi


def _as_phi0(phi0) -> np.ndarray:
    if isinstance(phi0, ScalarField):
        vals = phi0.real4()
        if not np.allclose(vals, vals[0]):
            raise InputError("phi0 must be a constant field")
        phi0 = vals[0]
    phi0 = np.array(phi0, dtype=float).reshape(4)
    if not np.any(phi0 != 0):
        raise InputError("phi0 must be non-zero")
    phi0.setflags(write=False)
    return phi0


@dataclass(frozen=True)
class RxiNonAbelian:
    xi: float
    g: float = 1.0
    phi0: np.ndarray = field(default_factory=lambda: DEFAULT_PHI0.copy())
    # Killing-raised generators T^a; with the Pauli basis K ~ identity.
    generators: np.ndarray = field(default_factory=lambda: groups.REAL4_GENERATORS.copy())

    def __post_init__(self):
        if not self.xi > 0 or self.g == 0:
            raise InputError("RxiNonAbelian needs xi > 0 and g != 0")
        object.__setattr__(self, "phi0", _as_phi0(self.phi0))
        T = np.array(self.generators, dtype=float)
        if T.shape != (3, 4, 4) or not np.array_equal(T, -np.swapaxes(T, -1, -2)):
            raise InputError("generators must be three antisymmetric real 4x4 matrices")
        T.setflags(write=False)
        object.__setattr__(self, "generators", T)

    @property
    def mass(self) -> float:
        return self.g * self.xi


@dataclass(frozen=True)
class Unitary:
    """Polar-decomposition gauge; ``phi0`` (SU(2) only) fixes the reference direction."""

    phi0: np.ndarray | None = None

    def __post_init__(self):
        if self.phi0 is not None:
            object.__setattr__(self, "phi0", _as_phi0(self.phi0))


GaugeFixSpec = Union[Lorenz, RxiAbelian, RxiNonAbelian, Unitary]


def unitary_limit(spec: GaugeFixSpec) -> Unitary:
    """The xi -> infinity member of an R_xi family."""
    if isinstance(spec, RxiNonAbelian):
        return Unitary(spec.phi0)
    return Unitary()


def _phi0_of(spec) -> np.ndarray:
    return spec.phi0 if spec.phi0 is not None else DEFAULT_PHI0


def _check_spec(spec: GaugeFixSpec, b: FieldBundle) -> None:
    if isinstance(spec, RxiAbelian) and b.kind != "U1":
        raise InputError("RxiAbelian applies to U(1) bundles")
    if isinstance(spec, RxiNonAbelian) and b.kind != "SU2":
        raise InputError("RxiNonAbelian applies to SU(2) bundles")
    if not isinstance(spec, (Lorenz, RxiAbelian, RxiNonAbelian, Unitary)):
        raise InputError(f"unknown gauge fixing spec {spec!r}")


# ---------------------------------------------------------------------------
# GF evaluation
# ---------------------------------------------------------------------------

def link_logs(b: FieldBundle) -> np.ndarray:
    """Link logarithms as (N, m, dim G), rejecting links near the branch cut."""
    c = b.links.log()
    if b.kind == "U1":
        if np.any(np.abs(c) > np.pi - BRANCH_MARGIN):
            raise BranchError("U(1) link angle too close to +-pi")
        return c[..., None]
    if np.any(np.linalg.norm(c, axis=-1) > np.pi - BRANCH_MARGIN):
        raise BranchError("SU(2) link too close to -1")
    return c


def divergence(lattice, c: np.ndarray) -> np.ndarray:
    """``-sum_mu [c_mu(x) - c_mu(x - mu)]`` for c of shape (..., N, m, d)."""
    out = np.zeros(c.shape[:-3] + (c.shape[-3], c.shape[-1]))
    for mu in range(lattice.ndim):
        back = lattice.shift(mu, -1)
        out -= c[..., :, mu, :] - c[..., back, mu, :]
    return out


def laplacian(lattice, alpha: np.ndarray) -> np.ndarray:
    """Periodic (2 ndim + 1)-point Laplacian along the site axis (axis 0)."""
    out = -2 * lattice.ndim * alpha
    for mu in range(lattice.ndim):
        out = out + alpha[lattice.shift(mu, 1)] + alpha[lattice.shift(mu, -1)]
    return out


def phase(b: FieldBundle) -> np.ndarray:
    """chi with phi = rho e^{i chi}; rejects vanishing scalars."""
    phi = b.scalar.data
    if np.any(np.abs(phi) == 0):
        raise DegenerateInputError("phase undefined where phi = 0")
    return np.angle(phi)


def gf_eval(spec: GaugeFixSpec, b: FieldBundle, offset=None) -> np.ndarray:
    """Evaluate ``GF(b) (+ offset)`` as an (N, dim G) array."""
    _check_spec(spec, b)
    n, d = b.lattice.n_sites, groups.algebra_dim(b.kind)
    if isinstance(spec, Unitary):
        if b.kind == "U1":
            out = phase(b)[:, None]
        else:
            w = b.scalar.real4()
            phi0 = _phi0_of(spec)
            T = groups.REAL4_GENERATORS
            out = np.stack([groups.antisym_form(T[a], phi0, w) for a in range(3)], axis=-1)
    else:
        out = divergence(b.lattice, link_logs(b))
        if isinstance(spec, RxiAbelian):
            chi = phase(b)
            if np.any(np.abs(chi) > np.pi - BRANCH_MARGIN):
                raise BranchError("scalar phase too close to +-pi")
            out = out - spec.mass * chi[:, None]
        elif isinstance(spec, RxiNonAbelian):
            w = b.scalar.real4()
            fluct = w - spec.phi0
            T = spec.generators
            out = out - spec.mass * np.stack(
                [groups.antisym_form(T[a], fluct, spec.phi0) for a in range(3)], axis=-1)
    if offset is not None:
        out = out + _offset_array(offset, n, d)
    return out


def linearized_gf(spec: GaugeFixSpec, psi: FieldBundle, xi: np.ndarray) -> np.ndarray:
    """Directional derivative ``d/de GF(ga_apply(psi, exp(e xi)))`` at e = 0.

    ``xi`` has shape (..., N, dim G); leading axes are batched.  This is the
    differential of GF o GA at the identity, i.e. the FP operator at ``psi``.
    """
    _check_spec(spec, psi)
    lat, k = psi.lattice, psi.kind
    xi = np.asarray(xi, dtype=float)
    if isinstance(spec, Unitary):
        if k == "U1":
            return -xi
        w = psi.scalar.real4()
        phi0 = _phi0_of(spec)
        T = groups.REAL4_GENERATORS
        # d/de phi0^T T^a exp(-e xi^b T_b) w = -phi0^T T^a T_b w xi^b
        M = -np.einsum("i,aij,bjk,xk->xab", phi0, T, T, w)
        return np.einsum("xab,...xb->...xa", M, xi)

    c = link_logs(psi)
    dc_ = np.empty(xi.shape[:-2] + c.shape)
    for mu in range(lat.ndim):
        fwd = xi[..., lat.shift(mu, 1), :]
        if k == "U1":
            dc_[..., mu, :] = fwd - xi
        else:
            V = psi.links.data[:, mu]
            Rinv = np.swapaxes(groups.su2_adjoint(V), -1, -2)  # Ad_{V^-1}
            Jinv = groups.su2_dlog_right(c[:, mu])
            y = fwd - np.einsum("xab,...xb->...xa", Rinv, xi)
            dc_[..., mu, :] = np.einsum("xab,...xb->...xa", Jinv, y)
    out = divergence(lat, dc_)
    if isinstance(spec, RxiAbelian):
        out = out + spec.mass * xi
    elif isinstance(spec, RxiNonAbelian):
        w = psi.scalar.real4()
        T = spec.generators
        # -m d/de (exp(-e xi.T) w - phi0)^T T^a phi0 = m (T_b w)^T T^a phi0 xi^b
        M = spec.mass * np.einsum("bij,xj,aik,k->xab", groups.REAL4_GENERATORS, w, T, spec.phi0)
        out = out + np.einsum("xab,...xb->...xa", M, xi)
    return out


def gf_matrix(spec: GaugeFixSpec, psi: FieldBundle) -> np.ndarray:
    """Dense matrix of ``linearized_gf`` in (site, component) row-major order."""
    n, d = psi.lattice.n_sites, groups.algebra_dim(psi.kind)
    basis = np.eye(n * d).reshape(n * d, n, d)
    cols = linearized_gf(spec, psi, basis).reshape(n * d, n * d)
    return cols.T


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    residual: float
    iterations: int
    converged: bool
    method: str
    ideality_violation: bool = False
    detail: str = ""


def _offset_array(offset, n, d):
    if offset is None:
        return np.zeros((n, d))
    off = np.asarray(offset, dtype=float)
    if off.ndim:
        off = off.reshape(n, -1) if off.size != d else off.reshape(1, d)
    return np.broadcast_to(off, (n, d)).copy()


def _finish(spec, b, u: GroupField, offset, tol, iterations, method, **kw):
    residual = float(np.max(np.abs(gf_eval(spec, dc(b, u), offset))))
    return u, SolveReport(residual, iterations, residual <= tol, method, **kw)


def _spectral(spec, b, offset, tol):
    lat = b.lattice
    m = spec.mass if isinstance(spec, RxiAbelian) else 0.0
    source = -divergence(lat, link_logs(b))[:, 0] - offset[:, 0]
    if m:
        source = source + m * phase(b)
    k2 = np.zeros(lat.dims)
    for mu, n_mu in enumerate(lat.dims):
        shape = [1] * lat.ndim
        shape[mu] = n_mu
        k2 = k2 + (4 * np.sin(np.pi * np.arange(n_mu) / n_mu) ** 2).reshape(shape)
    op = k2 + m
    s_hat = np.fft.fftn(source.reshape(lat.dims))
    violation = False
    if m == 0:
        zero_mode = abs(s_hat.flat[0]) / lat.n_sites
        violation = zero_mode > 1e-12 * (1 + np.max(np.abs(source)))
        s_hat.flat[0] = 0.0
        op.flat[0] = 1.0
    alpha = np.real(np.fft.ifftn(s_hat / op)).ravel()
    u = GroupField.from_algebra(lat, "U1", alpha, ActionTag.DRESSING)
    detail = "constant-mode source left after zero-mean projection" if violation else ""
    return _finish(spec, b, u, offset, tol, 1, "spectral", ideality_violation=violation, detail=detail)


def unitary_dressing(b: FieldBundle, phi0=None) -> GroupField:
    """Closed-form unitary dressing: ``phi = rho u`` (U(1)) or ``phi = eta u d`` (SU(2)).

    ``d`` is the unit doublet along ``phi0`` (default (0, 1)).
    """
    if b.kind == "U1":
        return GroupField(b.lattice, "U1", phase(b), ActionTag.DRESSING)
    doublet = b.scalar.doublet()
    eta = np.linalg.norm(doublet, axis=-1)
    if np.any(eta == 0):
        raise DegenerateInputError("unitary dressing undefined where phi = 0")
    ref = groups.complexify(_as_phi0(DEFAULT_PHI0 if phi0 is None else phi0))
    ref = ref / np.linalg.norm(ref)
    u = groups.su2_from_column(doublet / eta[:, None]) @ groups.inv("SU2", groups.su2_from_column(ref))
    return GroupField(b.lattice, "SU2", u, ActionTag.DRESSING)


def _covariant_start(spec, b: FieldBundle) -> GroupField:
    """Starting dressing with ``start(b^gamma) = gamma^-1 start(b)``.

    Newton steps depend only on ``dc(b, u)``, so a covariant start keeps the
    whole iteration covariant and b, b^gamma land on matching solutions.
    """
    try:
        return unitary_dressing(b, getattr(spec, "phi0", None))
    except DegenerateInputError:
        return GroupField.identity(b.lattice, b.kind, ActionTag.DRESSING)


def _newton(spec, b, offset, tol, max_iter, jacobian, initial):
    lat, k = b.lattice, b.kind
    d = groups.algebra_dim(k)
    u = initial if initial is not None else _covariant_start(spec, b)

    def residual(u_):
        return gf_eval(spec, dc(b, u_), offset)

    r = residual(u)
    for it in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            return _finish(spec, b, u, offset, tol, it, f"newton-{jacobian}")
        psi = dc(b, u)
        J = gf_matrix(spec, psi) if jacobian == "analytic" else _fd_matrix(spec, psi, offset)
        step = -np.linalg.lstsq(J, r.ravel(), rcond=None)[0].reshape(-1, d)
        norm0, t = np.linalg.norm(r), 1.0
        while t > 1e-10:
            u_try = GroupField(lat, k, groups.mul(k, u.data, groups.exp(k, t * step if k == "SU2" else t * step[:, 0])),
                               ActionTag.DRESSING)
            try:
                r_try = residual(u_try)
            except BranchError:
                r_try = None
            if r_try is not None and np.linalg.norm(r_try) < norm0:
                break
            t *= 0.5
        else:
            return _finish(spec, b, u, offset, tol, it + 1, f"newton-{jacobian}",
                           detail="line search failed to reduce the residual")
        u, r = u_try, r_try
    return _finish(spec, b, u, offset, tol, max_iter, f"newton-{jacobian}",
                   detail="max_iter reached")


def _xi_continuation(spec, b, offset, tol, max_iter, jacobian, decades=4, per_decade=4):
    """Follow the solution from ``xi * 10**decades`` (near the unitary dressing) down to ``xi``."""
    u, rep = None, None
    for j in range(decades * per_decade, -1, -1):
        stage = replace(spec, xi=spec.xi * 10 ** (j / per_decade))
        u, rep = _newton(stage, b, offset, tol, max_iter, jacobian, u)
        if not rep.converged:
            rep.detail = f"xi continuation stalled at xi={stage.xi:.6g}: {rep.detail}"
            return u, rep
    rep.method += "+continuation"
    return u, rep


def _fd_matrix(spec, psi, offset=None, h=1e-3):
    n, d = psi.lattice.n_sites, groups.algebra_dim(psi.kind)

    def f(x):
        g = GroupField(psi.lattice, psi.kind, groups.exp(psi.kind, x.reshape(n, d) if psi.kind == "SU2" else x),
                       ActionTag.ADJOINT)
        return gf_eval(spec, ga_apply(psi, g)).ravel()

    return central_jacobian(f, np.zeros(n * d), h)


def gfm_solve(spec: GaugeFixSpec, b: FieldBundle, tol: float = 1e-10, max_iter: int = 50,
              offset=None, jacobian: str = "analytic", initial: GroupField | None = None):
    """Solve ``GF(dc(b, u)) (+ offset) = 0`` for the dressing field ``u``.

    Returns ``(u, SolveReport)``; non-convergence is reported, not raised.
    """
    _check_spec(spec, b)
    n, d = b.lattice.n_sites, groups.algebra_dim(b.kind)
    off = _offset_array(offset, n, d)
    if b.kind == "U1" and isinstance(spec, (RxiAbelian, Lorenz)):
        return _spectral(spec, b, off, tol)
    if isinstance(spec, Unitary):
        if b.kind == "U1":
            u = GroupField(b.lattice, "U1", phase(b) + off[:, 0], ActionTag.DRESSING)
            return _finish(spec, b, u, off, tol, 0, "closed-form")
        if not np.any(off):
            return _finish(spec, b, unitary_dressing(b, _phi0_of(spec)), off, tol, 0, "closed-form")
    u, rep = _newton(spec, b, off, tol, max_iter, jacobian, initial)
    if not rep.converged and initial is None and isinstance(spec, RxiNonAbelian):
        u, rep = _xi_continuation(spec, b, off, tol, max_iter, jacobian)
    if isinstance(spec, Lorenz):
        rep.ideality_violation = True
        rep.detail = (rep.detail + "; " if rep.detail else "") + "Lorenz: global rotations are zero modes"
    return u, rep


def gfm(spec: GaugeFixSpec, b: FieldBundle, tol: float = 1e-10, **kw) -> GroupField:
    """``gfm_solve`` that raises if the solve does not converge."""
    u, rep = gfm_solve(spec, b, tol, **kw)
    if not rep.converged:
        raise RuntimeError(f"gauge fixing did not converge: {rep}")
    return u


# ---------------------------------------------------------------------------
# Equivariance, xi sweeps, locality
# ---------------------------------------------------------------------------

@dataclass
class EquivarianceReport:
    distance: float            # sup_x d(GFM(b^gamma), gamma^-1 GFM(b))
    dressed_distance: float    # sup-norm of DCGFM(b^gamma) - DCGFM(b)
    tol: float
    passed: bool
    conclusive: bool
    reports: tuple = ()


def check_gfm_equivariance(spec: GaugeFixSpec, b: FieldBundle, gamma: GroupField, tol: float,
                           solver_tol: float | None = None, **solve_kw) -> EquivarianceReport:
    solver_tol = tol / 10 if solver_tol is None else solver_tol
    u1, r1 = gfm_solve(spec, b, solver_tol, **solve_kw)
    b2 = gt(b, gamma)
    u2, r2 = gfm_solve(spec, b2, solver_tol, **solve_kw)
    if not (r1.converged and r2.converged):
        return EquivarianceReport(np.inf, np.inf, tol, False, False, (r1, r2))
    expected = groups.mul(b.kind, groups.inv(b.kind, gamma.data), u1.data)
    dist = float(np.max(groups.distance(b.kind, u2.data, expected)))
    dressed = field_distance(dc(b2, u2), dc(b, u1))
    return EquivarianceReport(dist, dressed, tol, dist <= tol and dressed <= tol, True, (r1, r2))


@dataclass
class SweepRow:
    xi: float
    mass: float
    distance: float
    converged: bool


def xi_sweep(family: GaugeFixSpec, b: FieldBundle, xis, tol: float = 1e-10, **solve_kw) -> list[SweepRow]:
    """Distance between ``u_xi`` and the unitary dressing ``u_inf`` for each xi."""
    if not isinstance(family, (RxiAbelian, RxiNonAbelian)):
        raise InputError("xi_sweep needs an R_xi family")
    u_inf, _ = gfm_solve(unitary_limit(family), b, tol)
    rows = []
    for xi in xis:
        spec = replace(family, xi=float(xi))
        try:
            u, rep = gfm_solve(spec, b, tol, **solve_kw)
            dist = float(np.max(groups.distance(b.kind, u.data, u_inf.data)))
            rows.append(SweepRow(float(xi), spec.mass, dist, rep.converged))
        except (BranchError, DegenerateInputError):
            rows.append(SweepRow(float(xi), spec.mass, np.nan, False))
    return rows


def loglog_slope(rows: list[SweepRow], decades: float = 2.0) -> float:
    """Least-squares slope of log distance vs log mass over the top ``decades``."""
    m = np.array([r.mass for r in rows])
    dist = np.array([r.distance for r in rows])
    keep = (m >= m.max() / 10**decades * (1 - 1e-12)) & np.isfinite(dist) & (dist > 0)
    return float(np.polyfit(np.log(m[keep]), np.log(dist[keep]), 1)[0])


@dataclass
class LocalityProfile:
    scalar: np.ndarray   # rows (distance, max |du|) for a scalar perturbation at `site`
    links: np.ndarray    # rows (distance, max |du|) for a link perturbation at `site`
    conclusive: bool


def _profile(lat, site, u0, u1, kind):
    dist = lat.distances_from(site)
    du = groups.distance(kind, u0.data, u1.data)
    return np.array([[d, float(np.max(du[dist == d]))] for d in range(int(dist.max()) + 1)])


def locality_profile(spec: GaugeFixSpec, b: FieldBundle, site: int, eps: float,
                     tol: float = 1e-10, **solve_kw) -> LocalityProfile:
    """Response of ``u = GFM(b)`` to a local perturbation at ``site``, binned by graph distance."""
    lat, k = b.lattice, b.kind
    u0, r0 = gfm_solve(spec, b, tol, **solve_kw)

    t_scalar = zero_tangent(b)
    s = np.zeros_like(b.scalar.data)
    if b.scalar.rep == "U1-complex":
        s[site] = 1j
    elif b.scalar.rep == "SU2-doublet":
        s[site, 0] = 1j
    else:
        s[site, 1] = 1.0
    t_scalar = replace(t_scalar, scalar=s)
    t_link = zero_tangent(b)
    t_link.links[site, 0, 0] = 1.0

    u_s, r_s = gfm_solve(spec, perturb(b, t_scalar, eps), tol, **solve_kw)
    u_l, r_l = gfm_solve(spec, perturb(b, t_link, eps), tol, **solve_kw)
    ok = r0.converged and r_s.converged and r_l.converged
    return LocalityProfile(_profile(lat, site, u0, u_s, k), _profile(lat, site, u0, u_l, k), ok)
