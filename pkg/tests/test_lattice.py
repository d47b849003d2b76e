import numpy as np
import pytest

from dfmlab.errors import InputError
from dfmlab.lattice import Lattice


def test_index_coords_roundtrip():
    lat = Lattice((3, 4, 2))
    for s in range(lat.n_sites):
        assert lat.index(lat.coords(s)) == s


def test_neighbors_wrap():
    lat = Lattice((3, 4))
    assert lat.neighbor(lat.index((2, 1)), 0, 1) == lat.index((0, 1))
    assert lat.neighbor(lat.index((0, 0)), 1, -1) == lat.index((0, 3))


def test_shift_tables_are_inverse_permutations():
    lat = Lattice((3, 5))
    for mu in range(lat.ndim):
        fwd, back = lat.shift(mu, 1), lat.shift(mu, -1)
        np.testing.assert_array_equal(fwd[back], np.arange(lat.n_sites))
        assert sorted(fwd) == list(range(lat.n_sites))


def test_single_site_is_its_own_neighbour():
    lat = Lattice((1,))
    assert lat.neighbor(0, 0, 1) == 0


def test_graph_distance():
    lat = Lattice((4, 4))
    assert lat.graph_distance(lat.index((0, 0)), lat.index((3, 2))) == 3
    assert lat.distances_from(0).max() == 4


@pytest.mark.parametrize("dims", [(), (0, 2), (-1,)])
def test_invalid_dims(dims):
    with pytest.raises(InputError):
        Lattice(dims)


def test_out_of_range_site_and_direction():
    lat = Lattice((2, 2))
    with pytest.raises(InputError):
        lat.coords(4)
    with pytest.raises(InputError):
        lat.neighbor(0, 2)
