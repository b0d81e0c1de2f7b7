import itertools

from hypothesis import given, strategies as st

from wrlab.lattice import Box, bonds_touching, inner_bonds, l1_distance, neighbors, outer_boundary


def test_neighbors_2d_origin():
    assert neighbors((0, 0)) == [(-1, 0), (1, 0), (0, -1), (0, 1)]


def test_neighbors_1d():
    assert neighbors((5,)) == [(4,), (6,)]


def test_neighbors_3d_count():
    assert len(neighbors((0, 0, 0))) == 6


def test_outer_boundary_unit_square():
    assert len(outer_boundary(Box((0, 0), (0, 0)))) == 4


def test_outer_boundary_2x2():
    got = set(outer_boundary(Box((0, 0), (1, 1))))
    expected = {(-1, 0), (-1, 1), (2, 0), (2, 1), (0, -1), (1, -1), (0, 2), (1, 2)}
    assert got == expected


def test_outer_boundary_interval():
    assert outer_boundary(Box((0,), (2,))) == [(-1,), (3,)]


def test_bond_counts_small():
    assert len(bonds_touching(Box((0, 0), (0, 0)))) == 4
    assert len(bonds_touching(Box((0, 0), (1, 0)))) == 7
    assert len(bonds_touching(Box((0,), (1,)))) == 3


def test_box_cube_contains_origin():
    b = Box.cube(64)
    assert b.lower == (-32, -32) and b.upper == (31, 31)
    assert (0, 0) in b and b.size == 64 * 64


def test_box_rejects_empty():
    import pytest
    with pytest.raises(ValueError):
        Box((1,), (0,))


box_st = st.integers(1, 3).flatmap(
    lambda d: st.tuples(st.lists(st.integers(-3, 3), min_size=d, max_size=d),
                        st.lists(st.integers(1, 6 if d < 3 else 4), min_size=d, max_size=d))
).map(lambda t: Box(tuple(t[0]), tuple(lo + s - 1 for lo, s in zip(*t))))


@given(box_st)
def test_boundary_size_formula(box):
    sides = box.shape
    expected = 0
    for i in range(box.d):
        prod = 1
        for j, s in enumerate(sides):
            if j != i:
                prod *= s
        expected += 2 * prod
    bd = outer_boundary(box)
    assert len(bd) == expected
    assert all(s not in box for s in bd)
    assert all(any(nb in box for nb in neighbors(s)) for s in bd)


@given(box_st)
def test_bonds_touching_decomposition(box):
    bonds = bonds_touching(box)
    inner = inner_bonds(box.sites())
    boundary = set(outer_boundary(box))
    crossing = {frozenset((s, nb)) for s in box.sites() for nb in neighbors(s) if nb in boundary}
    assert bonds == {frozenset(b) for b in inner} | crossing
    assert len(inner) + len(crossing) == len(bonds)
    for b in bonds:
        i, j = tuple(b)
        assert l1_distance(i, j) == 1
        assert i in box or j in box


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=4))
def test_neighbor_symmetry(site):
    site = tuple(site)
    for nb in neighbors(site):
        assert site in neighbors(nb)
        assert l1_distance(site, nb) == 1


def test_sites_lexicographic():
    box = Box((0, 0), (1, 2))
    assert list(box.sites()) == list(itertools.product(range(2), range(3)))
    assert [box.index(s) for s in box.sites()] == list(range(6))
