"""Periodic hypercubic lattice geometry.

Sites are numbered in row-major (C) order over ``dims``; every field in the
package uses this flat layout, so finite-difference Jacobians can be indexed
by ``(site, component)`` without any reshuffling.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Lattice:
    """Periodic lattice with ``dims[mu]`` sites along direction ``mu``.

    ``spacing`` is the lattice unit ``a``. It never enters the numerics
    (all lattice operators are written in units a = 1) and is kept only so
    continuum dictionaries such as ``U = exp(-i a g A)`` can be stated.
    """

    dims: tuple[int, ...]
    spacing: float = 1.0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise InputError("lattice needs at least one dimension")
        # dims of 1 are allowed: single-site lattices are used by the polar
        # Jacobian checks; the site is then its own periodic neighbour.
        if any(d < 1 for d in dims):
            raise InputError(f"lattice dims must be positive, got {dims}")
        if not self.spacing > 0:
            raise InputError(f"lattice spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "dims", dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    def coords(self, site: int) -> tuple[int, ...]:
        self._check_site(site)
        return tuple(int(c) for c in np.unravel_index(site, self.dims))

    def index(self, coords: Sequence[int]) -> int:
        if len(coords) != self.ndim:
            raise InputError(f"expected {self.ndim} coordinates, got {len(coords)}")
        wrapped = tuple(int(c) % d for c, d in zip(coords, self.dims))
        return int(np.ravel_multi_index(wrapped, self.dims))

    def neighbor(self, site: int, direction: int, sign: int = 1) -> int:
        """Periodic neighbour of ``site`` one step along ``sign * e_direction``."""
        self._check_dir(direction)
        if sign not in (1, -1):
            raise InputError(f"sign must be +1 or -1, got {sign}")
        return int(self.shift(direction, sign)[self._check_site(site)])

    def shift(self, direction: int, sign: int = 1) -> np.ndarray:
        """Index table ``t`` with ``t[x] = x + sign * e_direction`` for all sites."""
        self._check_dir(direction)
        return self._shifts[(direction, 1 if sign > 0 else -1)]

    @cached_property
    def _shifts(self) -> dict:
        grid = np.arange(self.n_sites).reshape(self.dims)
        table = {}
        for mu in range(self.ndim):
            for s in (1, -1):
                # np.roll by -s moves the value of x + s e_mu onto x
                table[(mu, s)] = np.roll(grid, -s, axis=mu).ravel()
                table[(mu, s)].setflags(write=False)
        return table

    def graph_distance(self, a: int, b: int) -> int:
        """Shortest periodic path length (L1 with wrap-around) between two sites."""
        ca, cb = self.coords(a), self.coords(b)
        return int(sum(min(abs(i - j), d - abs(i - j)) for i, j, d in zip(ca, cb, self.dims)))

    def distances_from(self, site: int) -> np.ndarray:
        return np.array([self.graph_distance(site, x) for x in range(self.n_sites)])

    def _check_site(self, site) -> int:
        if not (0 <= int(site) < self.n_sites):
            raise InputError(f"site {site} out of range [0, {self.n_sites})")
        return int(site)

    def _check_dir(self, direction) -> None:
        if not (0 <= int(direction) < self.ndim):
            raise InputError(f"direction {direction} out of range [0, {self.ndim})")
