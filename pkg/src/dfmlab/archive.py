"""Binary field archives (little-endian, format DFM1 version 1).

Layout::

    b"DFM1"  u16 version  u8 kind  u8 m  m x u32 dims
    u8 rep  u8 acted  f64 coupling  f64 spacing
    links   N*m f64 angles (U1) or N*m*8 f64 (SU2, row-major, re/im interleaved)
    scalar  N*2 f64 (U1 re/im), N*4 f64 (doublet re/im interleaved) or N*4 f64 (real4)
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ArchiveError
from .fields import ActionTag, FieldBundle, LinkField, ScalarField
from .lattice import Lattice

MAGIC = b"DFM1"
VERSION = 1
KINDS = ("U1", "SU2")
REPS = ("U1-complex", "SU2-doublet", "SU2-real4")
_F64 = np.dtype("<f8")


def _encode(b: FieldBundle) -> bytes:
    lat = b.lattice
    head = MAGIC + struct.pack("<HBB", VERSION, KINDS.index(b.kind), lat.ndim)
    head += struct.pack(f"<{lat.ndim}I", *lat.dims)
    head += struct.pack("<BBdd", REPS.index(b.scalar.rep), int(b.acted), b.links.coupling, lat.spacing)
    links = np.asarray(b.links.data)
    if b.kind == "SU2":
        links = links.view(float) if links.flags.c_contiguous else np.ascontiguousarray(links).view(float)
    scalar = np.ascontiguousarray(b.scalar.data)
    if np.iscomplexobj(scalar):
        scalar = scalar.view(float)
    return head + links.astype(_F64).tobytes() + scalar.astype(_F64).tobytes()


def write_archive(path, bundle: FieldBundle) -> None:
    try:
        Path(path).write_bytes(_encode(bundle))
    except OSError as exc:
        raise ArchiveError(f"cannot write archive {path}: {exc}") from exc


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = data, 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ArchiveError("truncated archive")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype=_F64).astype(float)


def decode(data: bytes) -> FieldBundle:
    r = _Reader(data)
    if len(data) < 4 or r.take(4) != MAGIC:
        raise ArchiveError("bad magic: not a DFM1 field archive")
    version, kind_id, m = r.unpack("<HBB")
    if version != VERSION:
        raise ArchiveError(f"unsupported archive version {version} (expected {VERSION})")
    if kind_id >= len(KINDS):
        raise ArchiveError(f"unknown group kind id {kind_id}")
    dims = r.unpack(f"<{m}I")
    rep_id, acted, coupling, spacing = r.unpack("<BBdd")
    if rep_id >= len(REPS) or acted not in (0, 1):
        raise ArchiveError("bad header: representation or tag out of range")
    kind, rep = KINDS[kind_id], REPS[rep_id]
    try:
        lat = Lattice(tuple(dims), spacing)
    except ValueError as exc:
        raise ArchiveError(f"bad header: {exc}") from exc
    n = lat.n_sites
    if kind == "U1":
        links = r.floats(n * m).reshape(n, m)
    else:
        links = r.floats(n * m * 8).view(complex).reshape(n, m, 2, 2)
    if rep == "SU2-real4":
        scalar = r.floats(n * 4).reshape(n, 4)
    else:
        width = 1 if rep == "U1-complex" else 2
        scalar = r.floats(n * 2 * width).view(complex).reshape((n,) if width == 1 else (n, 2))
    if r.pos != len(data):
        raise ArchiveError("trailing bytes after archive payload")
    link_tag = ActionTag.CONNECTION if acted else ActionTag.TRIVIAL
    scalar_tag = ActionTag.REPRESENTATION if acted else ActionTag.TRIVIAL
    try:
        return FieldBundle(LinkField(lat, kind, links, link_tag, coupling),
                           ScalarField(lat, rep, scalar, scalar_tag))
    except ValueError as exc:
        raise ArchiveError(f"invalid archive contents: {exc}") from exc


def read_archive(path) -> FieldBundle:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArchiveError(f"cannot read archive {path}: {exc}") from exc
    return decode(data)
