"""Field containers tagged with a gauge-group action, and the field-composers.

One container type serves several field spaces: a ``GroupField`` holds a
gauge transformation, a dressing or an undressing depending only on its
``tag``.  ``ga_apply`` is the bare functional right action and ignores tags;
``gt``, ``dc``, ``udc``, ``mu`` and ``iota`` check tags first and assign the
output tag from their admissible tables.

Link law: ``U_mu(x) -> g(x)^-1 U_mu(x) g(x + mu)``.  With the continuum
dictionary ``U_mu(x) = exp(-i a g A_mu(x))`` this reproduces
``A^gamma = gamma^-1 A gamma + i g^-1 gamma^-1 d gamma`` to first order in a.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Literal, Union

import numpy as np

from . import groups
from .errors import InputError, TagError
from .groups import Kind
from .lattice import Lattice

Rep = Literal["U1-complex", "SU2-doublet", "SU2-real4"]
REP_KIND = {"U1-complex": "U1", "SU2-doublet": "SU2", "SU2-real4": "SU2"}


class ActionTag(enum.Enum):
    ADJOINT = "adjoint"          # gamma^g = g^-1 gamma g
    CONNECTION = "connection"    # A^gamma = gamma^-1 A gamma + derivative term
    REPRESENTATION = "representation"  # phi^gamma = ell(gamma^-1) phi
    TRIVIAL = "trivial"
    DRESSING = "dressing"        # u^gamma = gamma^-1 u
    UNDRESSING = "undressing"    # v^gamma = v gamma


GROUP_TAGS = {ActionTag.ADJOINT, ActionTag.DRESSING, ActionTag.UNDRESSING, ActionTag.TRIVIAL}


def _frozen(a, dtype=None) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GroupField:
    lattice: Lattice
    kind: Kind
    data: np.ndarray
    tag: ActionTag = ActionTag.ADJOINT

    def __post_init__(self):
        groups.check_kind(self.kind)
        if self.tag not in GROUP_TAGS:
            raise TagError(f"group fields cannot carry tag {self.tag}")
        n = self.lattice.n_sites
        if self.kind == "U1":
            data = _frozen(groups.wrap_angle(self.data), float)
            expected = (n,)
        else:
            data = _frozen(groups.su2_project(self.data), complex)
            expected = (n, 2, 2)
        if data.shape != expected:
            raise InputError(f"group field data shape {data.shape}, expected {expected}")
        groups.validate(self.kind, data)
        object.__setattr__(self, "data", data)

    def retag(self, tag: ActionTag) -> "GroupField":
        return replace(self, tag=tag)

    @classmethod
    def identity(cls, lattice: Lattice, kind: Kind, tag: ActionTag = ActionTag.ADJOINT):
        return cls(lattice, kind, groups.identity(kind, (lattice.n_sites,)), tag)

    @classmethod
    def from_algebra(cls, lattice: Lattice, kind: Kind, coeffs, tag: ActionTag = ActionTag.ADJOINT):
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(lattice, kind, groups.exp(kind, coeffs), tag)

    def log(self) -> np.ndarray:
        return groups.log(self.kind, self.data)


@dataclass(frozen=True)
class LinkField:
    lattice: Lattice
    kind: Kind
    data: np.ndarray
    tag: ActionTag = ActionTag.CONNECTION
    coupling: float = 1.0

    def __post_init__(self):
        groups.check_kind(self.kind)
        if self.tag not in (ActionTag.CONNECTION, ActionTag.TRIVIAL):
            raise TagError(f"link fields cannot carry tag {self.tag}")
        if self.coupling == 0 or not np.isfinite(self.coupling):
            raise InputError("coupling must be finite and non-zero")
        n, m = self.lattice.n_sites, self.lattice.ndim
        if self.kind == "U1":
            data = _frozen(groups.wrap_angle(self.data), float)
            expected = (n, m)
        else:
            data = _frozen(groups.su2_project(self.data), complex)
            expected = (n, m, 2, 2)
        if data.shape != expected:
            raise InputError(f"link data shape {data.shape}, expected {expected}")
        groups.validate(self.kind, data)
        object.__setattr__(self, "data", data)

    def log(self) -> np.ndarray:
        """Link logarithms: angles (N, m) for U(1), coefficients (N, m, 3) for SU(2)."""
        return groups.log(self.kind, self.data)

    @classmethod
    def identity(cls, lattice: Lattice, kind: Kind, tag=ActionTag.CONNECTION, coupling=1.0):
        return cls(lattice, kind, groups.identity(kind, (lattice.n_sites, lattice.ndim)), tag, coupling)


@dataclass(frozen=True)
class ScalarField:
    lattice: Lattice
    rep: Rep
    data: np.ndarray
    tag: ActionTag = ActionTag.REPRESENTATION

    def __post_init__(self):
        if self.rep not in REP_KIND:
            raise InputError(f"unknown representation {self.rep!r}")
        if self.tag not in (ActionTag.REPRESENTATION, ActionTag.TRIVIAL):
            raise TagError(f"scalar fields cannot carry tag {self.tag}")
        n = self.lattice.n_sites
        if self.rep == "U1-complex":
            data, expected = _frozen(self.data, complex), (n,)
        elif self.rep == "SU2-doublet":
            data, expected = _frozen(self.data, complex), (n, 2)
        else:
            data, expected = _frozen(self.data, float), (n, 4)
        if data.shape != expected:
            raise InputError(f"scalar data shape {data.shape}, expected {expected}")
        if not np.all(np.isfinite(data)):
            raise InputError("scalar field entries must be finite")
        object.__setattr__(self, "data", data)

    @property
    def kind(self) -> Kind:
        return REP_KIND[self.rep]

    def doublet(self) -> np.ndarray:
        if self.rep == "SU2-real4":
            return groups.complexify(self.data)
        if self.rep == "SU2-doublet":
            return np.array(self.data)
        raise InputError("U(1) scalars have no doublet form")

    def real4(self) -> np.ndarray:
        if self.rep == "SU2-doublet":
            return groups.realify(self.data)
        if self.rep == "SU2-real4":
            return np.array(self.data)
        raise InputError("U(1) scalars have no real4 form")

    def as_rep(self, rep: Rep) -> "ScalarField":
        """Bit-deterministic adapter between the doublet and real4 layouts."""
        if rep == self.rep:
            return self
        if rep == "SU2-real4":
            return replace(self, rep=rep, data=self.real4())
        if rep == "SU2-doublet":
            return replace(self, rep=rep, data=self.doublet())
        raise InputError(f"cannot convert {self.rep} to {rep}")

    def norm(self) -> np.ndarray:
        if self.rep == "U1-complex":
            return np.abs(self.data)
        return np.linalg.norm(self.data, axis=-1)


@dataclass(frozen=True)
class FieldBundle:
    links: LinkField
    scalar: ScalarField

    def __post_init__(self):
        if self.links.lattice != self.scalar.lattice:
            raise InputError("links and scalar live on different lattices")
        if self.links.kind != self.scalar.kind:
            raise InputError("links and scalar belong to different groups")
        acted = (self.links.tag, self.scalar.tag) == (ActionTag.CONNECTION, ActionTag.REPRESENTATION)
        trivial = (self.links.tag, self.scalar.tag) == (ActionTag.TRIVIAL, ActionTag.TRIVIAL)
        if not (acted or trivial):
            raise TagError("bundle must be entirely gauge-acted or entirely trivial")

    @property
    def lattice(self) -> Lattice:
        return self.links.lattice

    @property
    def kind(self) -> Kind:
        return self.links.kind

    @property
    def acted(self) -> bool:
        return self.links.tag is ActionTag.CONNECTION

    def retag(self, acted: bool) -> "FieldBundle":
        if acted:
            return FieldBundle(replace(self.links, tag=ActionTag.CONNECTION),
                               replace(self.scalar, tag=ActionTag.REPRESENTATION))
        return FieldBundle(replace(self.links, tag=ActionTag.TRIVIAL),
                           replace(self.scalar, tag=ActionTag.TRIVIAL))


AnyField = Union[FieldBundle, GroupField, LinkField, ScalarField]


# ---------------------------------------------------------------------------
# Bare functional action
# ---------------------------------------------------------------------------

def _check_compatible(obj, g: GroupField) -> None:
    if not isinstance(g, GroupField):
        raise InputError("the acting element must be a GroupField")
    if obj.lattice != g.lattice:
        raise InputError("lattice mismatch between field and group field")
    if obj.kind != g.kind:
        raise InputError(f"group kind mismatch: {obj.kind} vs {g.kind}")


def _act_links(links: LinkField, g: GroupField) -> np.ndarray:
    lat = links.lattice
    out = np.empty_like(links.data)
    for mu in range(lat.ndim):
        fwd = g.data[lat.shift(mu, 1)]
        if links.kind == "U1":
            out[:, mu] = links.data[:, mu] - g.data + fwd
        else:
            out[:, mu] = groups.inv("SU2", g.data) @ links.data[:, mu] @ fwd
    return out


def _act_scalar(scalar: ScalarField, g: GroupField) -> np.ndarray:
    if scalar.rep == "U1-complex":
        return np.exp(-1j * g.data) * scalar.data
    ginv = groups.inv("SU2", g.data)
    if scalar.rep == "SU2-doublet":
        return np.einsum("xij,xj->xi", ginv, scalar.data)
    return np.einsum("xij,xj->xi", groups.realify_matrix(ginv), scalar.data)


def ga_apply(obj: AnyField, g: GroupField) -> AnyField:
    """Functional right action of ``g`` on any field; the tags of both arguments are ignored."""
    _check_compatible(obj, g)
    if isinstance(obj, FieldBundle):
        return FieldBundle(ga_apply(obj.links, g), ga_apply(obj.scalar, g))
    if isinstance(obj, LinkField):
        return replace(obj, data=_act_links(obj, g))
    if isinstance(obj, ScalarField):
        return replace(obj, data=_act_scalar(obj, g))
    if isinstance(obj, GroupField):
        return replace(obj, data=groups.mul(g.kind, groups.mul(g.kind, groups.inv(g.kind, g.data), obj.data), g.data))
    raise InputError(f"cannot act on {type(obj).__name__}")


def _tags(obj: AnyField) -> set:
    if isinstance(obj, FieldBundle):
        return {obj.links.tag, obj.scalar.tag}
    return {obj.tag}


def _require(obj, allowed: set, what: str) -> None:
    if not _tags(obj) <= allowed:
        raise TagError(f"{what}: got tags {sorted(t.value for t in _tags(obj))}")


def _retag_like(obj: AnyField, acted: bool) -> AnyField:
    if isinstance(obj, FieldBundle):
        return obj.retag(acted)
    if isinstance(obj, LinkField):
        return replace(obj, tag=ActionTag.CONNECTION if acted else ActionTag.TRIVIAL)
    if isinstance(obj, ScalarField):
        return replace(obj, tag=ActionTag.REPRESENTATION if acted else ActionTag.TRIVIAL)
    return replace(obj, tag=ActionTag.ADJOINT if acted else ActionTag.TRIVIAL)


_ACTED = {ActionTag.CONNECTION, ActionTag.REPRESENTATION, ActionTag.ADJOINT}


def gt(obj: AnyField, gamma: GroupField) -> AnyField:
    """Gauge transformation: gauge-acted fields x gauge group -> gauge-acted fields."""
    _require(obj, _ACTED, "gt needs gauge-acted fields")
    if gamma.tag is not ActionTag.ADJOINT:
        raise TagError(f"gt needs a gauge transformation (adjoint tag), got {gamma.tag.value}")
    return ga_apply(obj, gamma)


def dc(obj: AnyField, u: GroupField) -> AnyField:
    """Dressing composer: gauge-acted fields x dressings -> invariant fields."""
    _require(obj, _ACTED - {ActionTag.ADJOINT}, "dc needs gauge-acted fields")
    if u.tag is not ActionTag.DRESSING:
        raise TagError(f"dc needs a dressing field, got {u.tag.value}")
    return _retag_like(ga_apply(obj, u), acted=False)


def udc(obj: AnyField, v: GroupField) -> AnyField:
    """Un-dressing composer: invariant fields x undressings -> gauge-acted fields."""
    _require(obj, {ActionTag.TRIVIAL}, "udc needs invariant fields")
    if v.tag is not ActionTag.UNDRESSING:
        raise TagError(f"udc needs an undressing field, got {v.tag.value}")
    return _retag_like(ga_apply(obj, v), acted=True)


_A, _D, _U, _T = ActionTag.ADJOINT, ActionTag.DRESSING, ActionTag.UNDRESSING, ActionTag.TRIVIAL
MU_TABLE = {(_A, _A): _A, (_A, _D): _D, (_U, _A): _U, (_D, _U): _A, (_U, _D): _T}
IOTA_TABLE = {_A: _A, _D: _U, _U: _D}


def mu(g1: GroupField, g2: GroupField) -> GroupField:
    """Pointwise product, restricted to the five admissible tag pairs."""
    if (g1.tag, g2.tag) not in MU_TABLE:
        raise TagError(f"mu is not a field-composer on ({g1.tag.value}, {g2.tag.value})")
    _check_compatible(g1, g2)
    return GroupField(g1.lattice, g1.kind, groups.mul(g1.kind, g1.data, g2.data),
                      MU_TABLE[(g1.tag, g2.tag)])


def iota(g: GroupField) -> GroupField:
    """Pointwise inverse: adjoint -> adjoint, dressing <-> undressing."""
    if g.tag not in IOTA_TABLE:
        raise TagError(f"iota is not a field-composer on {g.tag.value}")
    return GroupField(g.lattice, g.kind, groups.inv(g.kind, g.data), IOTA_TABLE[g.tag])


def gauge_act(obj: AnyField, gamma: GroupField) -> AnyField:
    """The field-space action ``obj -> obj^gamma`` dictated by the tag(s) of ``obj``."""
    _check_compatible(obj, gamma)
    if isinstance(obj, FieldBundle):
        return FieldBundle(gauge_act(obj.links, gamma), gauge_act(obj.scalar, gamma))
    if obj.tag is ActionTag.TRIVIAL:
        return obj
    if obj.tag in _ACTED:
        return ga_apply(obj, gamma)
    k = obj.kind
    if obj.tag is ActionTag.DRESSING:
        return replace(obj, data=groups.mul(k, groups.inv(k, gamma.data), obj.data))
    return replace(obj, data=groups.mul(k, obj.data, gamma.data))


# ---------------------------------------------------------------------------
# Distances and tangents
# ---------------------------------------------------------------------------

def field_distance(a: AnyField, b: AnyField) -> float:
    """Sup-norm site-wise distance between two fields of the same shape."""
    if isinstance(a, FieldBundle):
        return max(field_distance(a.links, b.links), field_distance(a.scalar, b.scalar))
    if isinstance(a, ScalarField):
        return float(np.max(np.abs(a.data - b.data), initial=0.0))
    return float(np.max(groups.distance(a.kind, a.data, b.data), initial=0.0))


@dataclass(frozen=True)
class BundleTangent:
    """Tangent vector at a bundle.

    ``links`` holds left-trivialized link directions ``(N, m, dim G)``: the
    curve is ``U -> exp(i eps d . tau) U`` (an angle shift for U(1)).
    ``scalar`` has the scalar's own layout and dtype; the curve is additive.
    """

    links: np.ndarray
    scalar: np.ndarray = field(default=None)

    def __add__(self, other):
        return BundleTangent(self.links + other.links, self.scalar + other.scalar)

    def __mul__(self, s):
        return BundleTangent(self.links * s, self.scalar * s)

    __rmul__ = __mul__

    def flat(self) -> np.ndarray:
        s = np.asarray(self.scalar)
        s = np.stack([s.real, s.imag], axis=-1) if np.iscomplexobj(s) else s
        return np.concatenate([np.ravel(self.links), np.ravel(s)])

    def sup(self) -> float:
        return float(max(np.max(np.abs(self.links), initial=0.0), np.max(np.abs(self.scalar), initial=0.0)))


def zero_tangent(b: FieldBundle) -> BundleTangent:
    d = groups.algebra_dim(b.kind)
    return BundleTangent(np.zeros((b.lattice.n_sites, b.lattice.ndim, d)), np.zeros_like(b.scalar.data))


def perturb(b: FieldBundle, t: BundleTangent, eps: float) -> FieldBundle:
    """Move ``b`` by ``eps`` along ``t`` (left exponential on links, additive on scalars)."""
    if b.kind == "U1":
        links = b.links.data + eps * t.links[..., 0]
    else:
        links = groups.su2_exp(eps * t.links) @ b.links.data
    return FieldBundle(replace(b.links, data=links), replace(b.scalar, data=b.scalar.data + eps * t.scalar))


def tangent_between(b0: FieldBundle, b1: FieldBundle) -> BundleTangent:
    """Inverse chart of ``perturb`` at ``b0`` with eps = 1."""
    if b0.kind == "U1":
        links = groups.wrap_angle(b1.links.data - b0.links.data)[..., None]
    else:
        links = groups.su2_log(b1.links.data @ groups.inv("SU2", b0.links.data))
    return BundleTangent(links, b1.scalar.data - b0.scalar.data)


# ---------------------------------------------------------------------------
# Deterministic random configurations
# ---------------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def random_group_field(lattice: Lattice, kind: Kind, seed: int, spread: float,
                       tag: ActionTag = ActionTag.ADJOINT) -> GroupField:
    """Site-wise ``exp`` of algebra coefficients drawn uniformly from [-spread, spread]."""
    if spread < 0:
        raise InputError("spread must be non-negative")
    d = groups.algebra_dim(kind)
    shape = (lattice.n_sites,) if kind == "U1" else (lattice.n_sites, d)
    coeffs = _rng(seed).uniform(-spread, spread, size=shape)
    return GroupField.from_algebra(lattice, kind, coeffs, tag)


def random_link_field(lattice: Lattice, kind: Kind, seed: int, spread: float,
                      coupling: float = 1.0) -> LinkField:
    d = groups.algebra_dim(kind)
    shape = (lattice.n_sites, lattice.ndim) + (() if kind == "U1" else (d,))
    coeffs = _rng(seed).uniform(-spread, spread, size=shape)
    return LinkField(lattice, kind, groups.exp(kind, coeffs), ActionTag.CONNECTION, coupling)


DEFAULT_DOUBLET_DIRECTION = np.array([0.0, 1.0], dtype=complex)


def random_scalar_field(lattice: Lattice, rep: Rep, seed: int, spread: float,
                        radius=(0.5, 2.0)) -> ScalarField:
    """Polar-form random scalar: modulus uniform in ``radius``, phase/orientation within ``spread``.

    SU(2) scalars are ``eta * u0 (0, 1)^T`` with ``u0`` a random group element.
    """
    rng = _rng(seed)
    n = lattice.n_sites
    r = rng.uniform(radius[0], radius[1], size=n)
    if rep == "U1-complex":
        chi = rng.uniform(-spread, spread, size=n)
        return ScalarField(lattice, rep, r * np.exp(1j * chi))
    u0 = groups.su2_exp(rng.uniform(-spread, spread, size=(n, 3)))
    doublet = r[:, None] * (u0 @ DEFAULT_DOUBLET_DIRECTION)
    return ScalarField(lattice, "SU2-doublet", doublet).as_rep(rep)


def random_bundle(lattice: Lattice, kind: Kind, seed: int, spread: float,
                  rep: Rep | None = None, coupling: float = 1.0, radius=(0.5, 2.0)) -> FieldBundle:
    rep = rep or ("U1-complex" if kind == "U1" else "SU2-doublet")
    if REP_KIND[rep] != kind:
        raise InputError(f"representation {rep} does not belong to {kind}")
    s_links, s_scalar = np.random.SeedSequence(int(seed) & (2**64 - 1)).generate_state(2, dtype=np.uint64)
    return FieldBundle(random_link_field(lattice, kind, int(s_links), spread, coupling),
                       random_scalar_field(lattice, rep, int(s_scalar), spread, radius))
