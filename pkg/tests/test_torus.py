from fractions import Fraction

import pytest

from lattperm.torus import ExtendedTorusGeom, GeometryError, ReflectionPlane, TorusGeom, all_planes


def test_origin_round_trip_and_periodicity():
    g = TorusGeom(2, 4)
    assert g.coords(g.origin) == (0, 0)
    assert g.site_index((4, 0)) == g.origin
    assert g.site_index((-2, 0)) == g.site_index((2, 0))


def test_site_ids_bijective_d3():
    g = TorusGeom(3, 4)
    assert len({g.site_index(g.coords(s)) for s in range(g.n)}) == 64


def test_neighbours():
    g = TorusGeom(1, 4)
    assert sorted(int(y) for y in g.nbr[g.origin]) == sorted([g.site_index((1,)), g.site_index((-1,))])
    g2 = TorusGeom(2, 4)
    want = {g2.site_index(c) for c in [(1, 0), (-1, 0), (0, 1), (0, -1)]}
    assert {int(y) for y in g2.nbr[g2.origin]} == want
    assert int(g2.nbr[g2.origin, 0]) == g2.unit(1)


def test_small_sides_rejected():
    with pytest.raises(GeometryError, match="at least 4"):
        TorusGeom(2, 2)


def test_parity_and_difference_table():
    g = TorusGeom(2, 6)
    assert len(g.odd_sites) == len(g.even_sites) == 18
    x, y = g.unit(1), g.unit(2, 2)
    assert g.diff_table[x, y] == g.site_index((-1, 2))
    assert g.add(g.unit(1), g.unit(1)) == g.unit(1, 2)


def test_symmetry_maps_preserve_neighbours():
    g = TorusGeom(2, 4)
    maps = g.symmetry_maps()
    assert len(maps) == 8
    for m in maps:
        assert sorted(int(m[int(y)]) for y in g.nbr[g.origin]) == sorted(int(y) for y in g.nbr[g.origin])


def test_extended_torus():
    g = TorusGeom(1, 4)
    ext = ExtendedTorusGeom(g)
    assert ext.vertex_count == 8
    assert len(ext.edges) == 4 + 4
    v = ext.virtual(0)
    assert ext.is_virtual(v) and not ext.is_virtual(0)
    assert ext.is_vertical(ext.edge_id[(0, v)])
    assert ext.edge_id[(0, v)] == ext.edge_id[(v, 0)]


def test_reflection_planes():
    g = TorusGeom(1, 4)
    planes = all_planes(g)
    assert [p.u for p in planes] == [Fraction(1, 2), Fraction(3, 2)]
    p = ReflectionPlane(g, 1, Fraction(1, 2))
    assert p.reflect(g.site_index((0,))) == g.site_index((1,))
    assert sorted(g.coords(s)[0] for s in p.plus_sites) == [1, 2]
    for s in range(g.n):
        assert p.reflect(p.reflect(s)) == s
