"""Faddeev-Popov operators, their determinants, and polar change-of-variables Jacobians.

Every operator is dense and indexed by ``(site, algebra component)`` in
row-major order.  Group directions use left-translation coordinates: the
column for ``xi`` is the derivative along ``u -> u exp(eps xi)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import groups
from .errors import CapacityError, DegenerateInputError, InputError
from .fields import (ActionTag, FieldBundle, GroupField, LinkField, ScalarField, dc, iota,
                     mu, perturb, udc)
from .gaugefix import GaugeFixSpec, gf_eval, gf_matrix, gfm_solve, unitary_dressing
from .numdiff import central_derivative, central_jacobian

MAX_DENSE_DIM = 2000


@dataclass(frozen=True)
class DenseOperator:
    entries: np.ndarray
    row_index: tuple = ()   # (site, component) per row
    col_index: tuple = ()

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or not np.all(np.isfinite(a)):
            raise InputError("operator entries must be a finite matrix")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def square(self) -> bool:
        return self.rows == self.cols


def _site_index(n: int, d: int) -> tuple:
    return tuple((x, a) for x in range(n) for a in range(d))


def _capacity(n: int, d: int) -> None:
    if n * d > MAX_DENSE_DIM:
        raise CapacityError(f"dense operator of size {n * d} exceeds the cap {MAX_DENSE_DIM}")


def _right_step(kind, u: GroupField, step) -> GroupField:
    """``u exp(step)`` for per-site algebra coordinates (N, dim G)."""
    x = step[:, 0] if kind == "U1" else step
    return GroupField(u.lattice, kind, groups.mul(kind, u.data, groups.exp(kind, x)), u.tag)


def fp_operator(spec: GaugeFixSpec, b: FieldBundle, u: GroupField, method: str = "analytic",
                h: float = 1e-3) -> DenseOperator:
    """Matrix of ``xi -> d/de GF(dc(b, u exp(e xi)))`` at e = 0.

    ``method="analytic"`` linearizes GF at the dressed configuration;
    ``method="fd"`` differentiates the literal composition column by column.
    """
    n, d = b.lattice.n_sites, groups.algebra_dim(b.kind)
    _capacity(n, d)
    if method == "analytic":
        mat = gf_matrix(spec, dc(b, u))
    elif method == "fd":
        def f(x):
            return gf_eval(spec, dc(b, _right_step(b.kind, u, x.reshape(n, d)))).ravel()
        mat = central_jacobian(f, np.zeros(n * d), h)
    else:
        raise InputError(f"unknown method {method!r}")
    idx = _site_index(n, d)
    return DenseOperator(mat, idx, idx)


def fp_logdet(op: DenseOperator) -> tuple[float, float]:
    """``(log|det|, sign)``; an exactly singular operator gives ``(-inf, 0)``."""
    if not op.square:
        raise InputError("determinant of a non-square operator")
    if op.rows == 0:
        return 0.0, 1.0
    sign, logabs = np.linalg.slogdet(op.entries)
    if sign == 0:
        return -np.inf, 0.0
    return float(logabs), float(sign)


@dataclass
class ShiftReport:
    logdet_shifted: float    # at (b, gamma u), built literally by finite differences
    logdet_dressed: float    # at (psi, e), psi = dc(b, gamma u), built analytically
    gap: float
    tol: float
    passed: bool
    conclusive: bool


def check_delta_shift(spec: GaugeFixSpec, b: FieldBundle, gamma: GroupField, u: GroupField,
                      tol: float = 1e-8) -> ShiftReport:
    """Determinant of the FP operator at (b, gamma u) equals the one at (psi, e).

    In left-translation coordinates the translation factor is exactly 1.
    """
    gu = mu(gamma, u)
    psi = dc(b, gu)
    shifted = fp_logdet(fp_operator(spec, b, gu, method="fd"))
    dressed = fp_logdet(DenseOperator(gf_matrix(spec, psi)))
    if shifted[1] == 0 or dressed[1] == 0:
        return ShiftReport(shifted[0], dressed[0], np.nan, tol, False, False)
    gap = abs(shifted[0] - dressed[0])
    ok = gap <= tol and shifted[1] == dressed[1]
    return ShiftReport(shifted[0], dressed[0], gap, tol, ok, True)


# ---------------------------------------------------------------------------
# Polar-decomposition Jacobians
# ---------------------------------------------------------------------------

@dataclass
class JacobianReport:
    logdet_numeric: float
    logdet_predicted: float
    relative_error: float
    per_site_factors: list = field(default_factory=list)
    chart: str = "rho"


def _report(logdet_numeric, factors, chart):
    predicted = float(np.sum(np.log(factors)))
    rel = float(abs(np.expm1(logdet_numeric - predicted)))
    return JacobianReport(float(logdet_numeric), predicted, rel, [float(f) for f in factors], chart)


def _check_chart(chart):
    if chart not in ("rho", "sigma"):
        raise InputError("chart must be 'rho' or 'sigma'")


def polar_jacobian_u1(b: FieldBundle, chart: str = "rho", h: float = 1e-3) -> JacobianReport:
    """Jacobian of ``C(a, rho, u) = udc((a, rho), u^-1)`` around the polar decomposition of ``b``.

    Coordinates: link angles, per-site ``rho`` (or ``sigma = ln rho``) and
    per-site angle of ``u``; outputs: link angles and ``(Re phi, Im phi)``.
    Predicted ``|det| = prod rho`` (``prod rho^2`` in the sigma chart).
    """
    _check_chart(chart)
    if b.kind != "U1":
        raise InputError("polar_jacobian_u1 needs a U(1) bundle")
    lat = b.lattice
    n, m = lat.n_sites, lat.ndim
    rho = b.scalar.norm()
    if np.any(rho == 0):
        raise DegenerateInputError("polar decomposition undefined where phi = 0")
    u0 = unitary_dressing(b)
    a0 = dc(b.links, u0).data
    s0 = np.log(rho) if chart == "sigma" else rho
    theta0 = b.links.data

    def C(x):
        a = a0 + x[: n * m].reshape(n, m)
        s = s0 + x[n * m: n * m + n]
        r = np.exp(s) if chart == "sigma" else s
        u = GroupField(lat, "U1", u0.data + x[n * m + n:], ActionTag.DRESSING)
        psi = FieldBundle(LinkField(lat, "U1", a, ActionTag.TRIVIAL, b.links.coupling),
                          ScalarField(lat, "U1-complex", r.astype(complex), ActionTag.TRIVIAL))
        phi = udc(psi, iota(u))
        dtheta = groups.wrap_angle(phi.links.data - theta0)
        return np.concatenate([dtheta.ravel(), phi.scalar.data.real, phi.scalar.data.imag])

    J = central_jacobian(C, np.zeros(n * m + 2 * n), h)
    logdet, _ = fp_logdet(DenseOperator(J))
    factors = rho**2 if chart == "sigma" else rho
    return _report(logdet, factors, chart)


def su2_polar_block(phi) -> np.ndarray:
    """Per-site scalar block of the SU(2) polar Jacobian, written out by rows.

    Columns: ``eta`` direction, then the three ``alpha`` directions; rows are
    the real components ``(phi1, phi2, phi3, phi4)``.
    """
    p1, p2, p3, p4 = np.asarray(phi, dtype=float)
    eta = np.sqrt(p1 * p1 + p2 * p2 + p3 * p3 + p4 * p4)
    if eta == 0:
        raise DegenerateInputError("block undefined at phi = 0")
    return np.array([
        [p1 / eta, -p4, p3, -p2],
        [p2 / eta, p3, p4, p1],
        [p3 / eta, -p2, -p1, p4],
        [p4 / eta, p1, -p2, -p3],
    ])


_DOWN = np.array([0.0, 1.0], dtype=complex)


def polar_jacobian_su2(b: FieldBundle, chart: str = "rho", h: float = 1e-3) -> JacobianReport:
    """Jacobian of ``C(a, eta, u)`` with ``phi = eta u (0, 1)^T`` around the decomposition of ``b``.

    Link coordinates are left-trivialized on both sides
    (``a = exp(i d.tau) a0``, output ``log(U U0^-1)``); ``u`` moves along
    ``exp(i alpha.tau) u0``.  Predicted ``|det| = prod eta^3`` (``eta^4`` in
    the sigma chart).
    """
    _check_chart(chart)
    if b.kind != "SU2":
        raise InputError("polar_jacobian_su2 needs an SU(2) bundle")
    lat = b.lattice
    n, m = lat.n_sites, lat.ndim
    eta = b.scalar.norm()
    if np.any(eta == 0):
        raise DegenerateInputError("polar decomposition undefined where phi = 0")
    u0 = unitary_dressing(b)
    a0 = dc(b.links, u0).data
    s0 = np.log(eta) if chart == "sigma" else eta
    U0inv = groups.inv("SU2", b.links.data)

    def C(x):
        a = groups.su2_exp(x[: 3 * n * m].reshape(n, m, 3)) @ a0
        s = s0 + x[3 * n * m: 3 * n * m + n]
        r = np.exp(s) if chart == "sigma" else s
        alpha = x[3 * n * m + n:].reshape(n, 3)
        u = GroupField(lat, "SU2", groups.su2_exp(alpha) @ u0.data, ActionTag.DRESSING)
        psi = FieldBundle(LinkField(lat, "SU2", a, ActionTag.TRIVIAL, b.links.coupling),
                          ScalarField(lat, "SU2-doublet", r[:, None] * _DOWN, ActionTag.TRIVIAL))
        phi = udc(psi, iota(u))
        dlink = groups.su2_log(phi.links.data @ U0inv)
        return np.concatenate([dlink.ravel(), phi.scalar.real4().ravel()])

    J = central_jacobian(C, np.zeros(3 * n * m + 4 * n), h)
    logdet, _ = fp_logdet(DenseOperator(J))
    factors = eta**4 if chart == "sigma" else eta**3
    return _report(logdet, factors, chart)


# ---------------------------------------------------------------------------
# Differential of the solution map
# ---------------------------------------------------------------------------

@dataclass
class DifferentialReport:
    predicted: np.ndarray    # -A^-1 d_F(GF o DC)(direction), left-translation coordinates
    observed: np.ndarray     # central difference of two solves
    deviation: float
    tol: float
    passed: bool
    conclusive: bool


def left_log(kind, u0: GroupField, u1: GroupField) -> np.ndarray:
    """Algebra coordinates of ``u0^-1 u1`` as (N, dim G)."""
    x = groups.log(kind, groups.mul(kind, groups.inv(kind, u0.data), u1.data))
    return x[:, None] if kind == "U1" else x


def gfm_differential_check(spec: GaugeFixSpec, b: FieldBundle, direction, eps: float = 1e-5,
                           solver_tol: float = 1e-12, h: float = 1e-3, **solve_kw) -> DifferentialReport:
    """Compare ``d GFM[b](direction)`` from the implicit-function formula with two solves."""
    n, d = b.lattice.n_sites, groups.algebra_dim(b.kind)
    u, rep = gfm_solve(spec, b, solver_tol, **solve_kw)
    shape = (n, d)
    if not rep.converged:
        return DifferentialReport(np.full(shape, np.nan), np.full(shape, np.nan), np.inf, 0.0, False, False)
    A = fp_operator(spec, b, u).entries
    rhs = central_derivative(lambda t: gf_eval(spec, dc(perturb(b, direction, t), u)), h).ravel()
    try:
        predicted = -np.linalg.solve(A, rhs).reshape(shape)
    except np.linalg.LinAlgError:
        return DifferentialReport(np.full(shape, np.nan), np.full(shape, np.nan), np.inf, 0.0, False, False)
    up, rp = gfm_solve(spec, perturb(b, direction, eps), solver_tol, initial=u, **solve_kw)
    um, rm = gfm_solve(spec, perturb(b, direction, -eps), solver_tol, initial=u, **solve_kw)
    observed = (left_log(b.kind, u, up) - left_log(b.kind, u, um)) / (2 * eps)
    tol = 1e-4 * (1 + float(np.max(np.abs(predicted))))
    dev = float(np.max(np.abs(predicted - observed)))
    ok = rp.converged and rm.converged
    return DifferentialReport(predicted, observed, dev, tol, ok and dev <= tol, ok)

