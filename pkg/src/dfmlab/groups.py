"""U(1) and SU(2) numerics.

U(1) elements are stored as angles in (-pi, pi]; SU(2) elements as dense
2x2 complex matrices.  Algebra elements are real coefficient vectors: one
real for U(1), three reals ``c`` for SU(2) with ``exp(i c . tau)`` and
``tau`` the Pauli matrices.

The real 4-dimensional representation of SU(2) acts on
``(phi1, phi2, phi3, phi4)`` with the doublet ``(phi1 + i phi2, phi3 + i phi4)``;
its generators ``T_a = realify(i tau_a)`` are real antisymmetric and satisfy
``ell(exp(i c . tau)) = expm(c^a T_a)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BranchError, InputError

Kind = Literal["U1", "SU2"]
KINDS = ("U1", "SU2")

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
ID2 = np.eye(2, dtype=complex)

UNITARITY_TOL = 1e-12
# |a| below this with a0 < 0 means the element is (numerically) -1
_ANTIPODAL_TOL = 1e-12


def algebra_dim(kind: Kind) -> int:
    return {"U1": 1, "SU2": 3}[check_kind(kind)]


def check_kind(kind) -> Kind:
    if kind not in KINDS:
        raise InputError(f"unknown group kind {kind!r}; expected one of {KINDS}")
    return kind


def wrap_angle(theta):
    """Reduce angles to the principal interval (-pi, pi]; in-range values pass through bit-exactly."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta > -np.pi) & (theta <= np.pi)
    return np.where(inside, theta, np.pi - np.mod(np.pi - theta, 2 * np.pi))


# ---------------------------------------------------------------------------
# SU(2) exponential / logarithm
# ---------------------------------------------------------------------------

def su2_exp(c) -> np.ndarray:
    """``exp(i c . tau) = cos|c| + i sin|c| (c/|c|) . tau`` for coefficient arrays (..., 3)."""
    c = np.asarray(c, dtype=float)
    beta = np.linalg.norm(c, axis=-1)
    sinc = np.sinc(beta / np.pi)  # sin(beta)/beta, =1 at 0
    gen = np.einsum("...a,aij->...ij", c, PAULI)
    return np.cos(beta)[..., None, None] * ID2 + 1j * sinc[..., None, None] * gen


def su2_components(u) -> tuple[np.ndarray, np.ndarray]:
    """Split ``u = a0 + i a . tau`` into ``(a0, a)``."""
    u = np.asarray(u)
    a0 = 0.5 * np.real(np.trace(u, axis1=-2, axis2=-1))
    a = 0.5 * np.imag(np.einsum("aij,...ji->...a", PAULI, u))
    return a0, a


def su2_log(u) -> np.ndarray:
    """Principal logarithm: coefficients ``c`` with ``|c| <= pi`` and ``exp(i c . tau) = u``."""
    a0, a = su2_components(u)
    na = np.linalg.norm(a, axis=-1)
    if np.any((na < _ANTIPODAL_TOL) & (a0 < 0)):
        raise BranchError("SU(2) logarithm undefined at -1 (antipodal to the identity)")
    beta = np.arctan2(na, a0)
    safe = np.where(na > 0, na, 1.0)
    factor = np.where(na > 1e-300, beta / safe, 1.0)
    return factor[..., None] * a


def su2_from_components(a0, a) -> np.ndarray:
    a0 = np.asarray(a0, dtype=float)
    return a0[..., None, None] * ID2 + 1j * np.einsum("...a,aij->...ij", a, PAULI)


def su2_adjoint(u) -> np.ndarray:
    """Matrix ``R`` of Ad_u on coefficients: ``u (i y.tau) u^-1 = i (R y) . tau``."""
    u = np.asarray(u)
    ud = np.conj(np.swapaxes(u, -1, -2))
    # R_ab = 1/2 tr(tau_a u tau_b u^dagger)
    return 0.5 * np.real(np.einsum("aij,...jk,bkl,...li->...ab", PAULI, u, PAULI, ud))


def su2_dlog_right(c) -> np.ndarray:
    """Inverse right Jacobian of the exponential at coefficients ``c`` (..., 3, 3).

    ``log(exp(i c.tau) exp(i d.tau)) = c + su2_dlog_right(c) @ d + O(d^2)``.
    """
    c = np.asarray(c, dtype=float)
    # ad_{i c.tau} acts on coefficients as y -> -2 c x y
    w = -2.0 * c
    theta = np.linalg.norm(w, axis=-1)
    K = np.zeros(c.shape[:-1] + (3, 3))
    K[..., 0, 1], K[..., 0, 2] = -w[..., 2], w[..., 1]
    K[..., 1, 0], K[..., 1, 2] = w[..., 2], -w[..., 0]
    K[..., 2, 0], K[..., 2, 1] = -w[..., 1], w[..., 0]
    small = theta < 1e-4
    th = np.where(small, 1.0, theta)
    b = np.where(small, 1.0 / 12.0 + theta**2 / 720.0,
                 (1.0 - 0.5 * th / np.tan(0.5 * th)) / th**2)
    return np.eye(3) + 0.5 * K + b[..., None, None] * (K @ K)


def su2_unitarity_defect(u) -> np.ndarray:
    u = np.asarray(u)
    ud = np.conj(np.swapaxes(u, -1, -2))
    defect = np.abs(ud @ u - ID2).max(axis=(-2, -1))
    return np.maximum(defect, np.abs(np.linalg.det(u) - 1.0))


# Drift above this is a wrong input, not accumulated roundoff
MAX_REPAIRABLE_DEFECT = 1e-6


def su2_project(u) -> np.ndarray:
    """Polar projection onto SU(2), applied only where the unitarity defect exceeds 1e-12.

    Elements further than ``MAX_REPAIRABLE_DEFECT`` from SU(2) are rejected.
    """
    u = np.array(u, dtype=complex)
    if u.shape[-2:] != (2, 2):
        raise InputError(f"SU(2) data must have trailing shape (2, 2), got {u.shape}")
    defect = su2_unitarity_defect(u)
    if np.any(~(defect <= MAX_REPAIRABLE_DEFECT)):
        raise InputError("SU(2) data violates unitarity / unit determinant")
    bad = defect > UNITARITY_TOL
    if np.any(bad):
        m = u[bad]
        left, _, right = np.linalg.svd(m)
        w = left @ right
        w /= np.sqrt(np.linalg.det(w))[..., None, None]
        u[bad] = w
    return u


# ---------------------------------------------------------------------------
# Kind-generic array operations (fields store raw arrays)
# ---------------------------------------------------------------------------

def identity(kind: Kind, shape=()) -> np.ndarray:
    if check_kind(kind) == "U1":
        return np.zeros(shape)
    return np.broadcast_to(ID2, tuple(shape) + (2, 2)).copy()


def exp(kind: Kind, x) -> np.ndarray:
    if check_kind(kind) == "U1":
        return wrap_angle(x)
    return su2_exp(x)


def log(kind: Kind, g) -> np.ndarray:
    if check_kind(kind) == "U1":
        return wrap_angle(g)
    return su2_log(g)


def mul(kind: Kind, a, b) -> np.ndarray:
    if check_kind(kind) == "U1":
        return wrap_angle(np.asarray(a) + np.asarray(b))
    return np.asarray(a) @ np.asarray(b)


def inv(kind: Kind, a) -> np.ndarray:
    if check_kind(kind) == "U1":
        return wrap_angle(-np.asarray(a))
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def distance(kind: Kind, a, b) -> np.ndarray:
    """Elementwise distance, approximately the algebra norm of ``a^-1 b`` for nearby elements.

    U(1): wrapped angle difference.  SU(2): ``||a - b||_F / sqrt(2)``.
    """
    if check_kind(kind) == "U1":
        return np.abs(wrap_angle(np.asarray(b) - np.asarray(a)))
    d = np.asarray(a) - np.asarray(b)
    return np.sqrt(np.sum(np.abs(d) ** 2, axis=(-2, -1)) / 2.0)


def validate(kind: Kind, g) -> None:
    """Raise if any element violates the group invariants."""
    g = np.asarray(g)
    if check_kind(kind) == "U1":
        if not np.all(np.isfinite(g)):
            raise InputError("U(1) angles must be finite")
        return
    if g.shape[-2:] != (2, 2):
        raise InputError(f"SU(2) data must have trailing shape (2, 2), got {g.shape}")
    if g.size and su2_unitarity_defect(g).max() > UNITARITY_TOL:
        raise InputError("SU(2) data violates unitarity / unit determinant")


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------

def realify(doublet) -> np.ndarray:
    """Doublet (..., 2) complex -> (phi1, phi2, phi3, phi4) real (..., 4)."""
    d = np.asarray(doublet)
    out = np.empty(d.shape[:-1] + (4,))
    out[..., 0], out[..., 1] = d[..., 0].real, d[..., 0].imag
    out[..., 2], out[..., 3] = d[..., 1].real, d[..., 1].imag
    return out


def complexify(real4) -> np.ndarray:
    r = np.asarray(real4, dtype=float)
    return np.stack([r[..., 0] + 1j * r[..., 1], r[..., 2] + 1j * r[..., 3]], axis=-1)


def realify_matrix(m) -> np.ndarray:
    """Real 4x4 matrix of the complex 2x2 ``m`` acting on realified doublets."""
    m = np.asarray(m, dtype=complex)
    out = np.empty(m.shape[:-2] + (4, 4))
    for i in range(2):
        for j in range(2):
            re, im = m[..., i, j].real, m[..., i, j].imag
            out[..., 2 * i, 2 * j] = re
            out[..., 2 * i, 2 * j + 1] = -im
            out[..., 2 * i + 1, 2 * j] = im
            out[..., 2 * i + 1, 2 * j + 1] = re
    return out


REAL4_GENERATORS = realify_matrix(1j * PAULI)


def antisym_form(T, x, y) -> np.ndarray:
    """``x^T T y`` for antisymmetric ``T`` summed as pairs, so ``x^T T x`` is exactly 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = T.shape[-1]
    out = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            t = T[..., i, j]
            if np.any(t != 0):
                out = out + t * (x[..., i] * y[..., j] - x[..., j] * y[..., i])
    return np.asarray(out)


def su2_from_column(w) -> np.ndarray:
    """The unique SU(2) matrix whose first column is the unit doublet ``w``."""
    w = np.asarray(w, dtype=complex)
    m = np.empty(w.shape[:-1] + (2, 2), dtype=complex)
    m[..., 0, 0], m[..., 1, 0] = w[..., 0], w[..., 1]
    m[..., 0, 1], m[..., 1, 1] = -np.conj(w[..., 1]), np.conj(w[..., 0])
    return m


# ---------------------------------------------------------------------------
# Single-element API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraElement:
    kind: Kind
    data: np.ndarray

    def __post_init__(self):
        check_kind(self.kind)
        data = np.atleast_1d(np.asarray(self.data, dtype=float)).copy()
        if data.shape != (algebra_dim(self.kind),):
            raise InputError(f"{self.kind} algebra element needs {algebra_dim(self.kind)} coefficients")
        if not np.all(np.isfinite(data)):
            raise InputError("algebra coefficients must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def matrix(self) -> np.ndarray:
        """Hermitean realization (``c . tau`` for SU(2), the real number for U(1))."""
        if self.kind == "U1":
            return np.array([[self.data[0]]], dtype=complex)
        return np.einsum("a,aij->ij", self.data, PAULI)


@dataclass(frozen=True)
class GroupElement:
    kind: Kind
    data: np.ndarray

    def __post_init__(self):
        check_kind(self.kind)
        if self.kind == "U1":
            data = np.asarray(wrap_angle(float(np.asarray(self.data).reshape(()))))
        else:
            data = np.array(self.data, dtype=complex)
            validate("SU2", data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.kind != self.kind:
            raise InputError("cannot multiply elements of different groups")
        return GroupElement(self.kind, su2_project(mul(self.kind, self.data, other.data))
                            if self.kind == "SU2" else mul(self.kind, self.data, other.data))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.kind, inv(self.kind, self.data))


def exp_map(x: AlgebraElement) -> GroupElement:
    if x.kind == "U1":
        return GroupElement("U1", x.data[0])
    return GroupElement("SU2", su2_project(su2_exp(x.data)))


def log_map(g: GroupElement) -> AlgebraElement:
    if g.kind == "U1":
        return AlgebraElement("U1", [float(g.data)])
    return AlgebraElement("SU2", su2_log(g.data))
