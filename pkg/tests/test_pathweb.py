from fractions import Fraction

import numpy as np
import pytest

from lattperm.pathweb import (PathWeb, central_quantity, chessboard_check, classify_paths, h_from_v,
                              key_inequality_check, mu_weight, polynomial_expansion_check,
                              reflection_positivity_check, verify_lemma_components)
from lattperm.permutation import partition_lambda, two_point_table
from lattperm.spectral import g_arrays, dft, dual_points, epsilon
from lattperm.torus import ExtendedTorusGeom, ReflectionPlane, TorusGeom

EXT = ExtendedTorusGeom(TorusGeom(1, 4))
E, V = len(EXT.edges), EXT.vertex_count


def _double_link(e: int) -> PathWeb:
    a, b = EXT.edges[e]
    m = [0] * E
    m[e] = 2
    pairs = [None] * V
    pairs[a] = pairs[b] = ((e, 1), (e, 2))
    return PathWeb(tuple(m), tuple(pairs))


def test_empty_web_weight():
    assert mu_weight(EXT, PathWeb((0,) * E, (None,) * V), 1, 1) == 1


def test_double_link_weight_and_class():
    w = _double_link(0)
    assert mu_weight(EXT, w, 1, 3) == Fraction(9, 2)
    assert [c.kind for c in classify_paths(EXT, w)] == ["double"]


def test_pairing_at_virtual_vertex_kills_weight():
    e = EXT.edge_id[(0, EXT.virtual(0))]
    m = [0] * E
    m[e] = 2
    pairs = [None] * V
    pairs[0] = pairs[EXT.virtual(0)] = ((e, 1), (e, 2))
    assert mu_weight(EXT, PathWeb(tuple(m), tuple(pairs)), 1, 1) == 0
    pairs[EXT.virtual(0)] = None
    assert mu_weight(EXT, PathWeb(tuple(m), tuple(pairs)), 1, 1) != 0


def test_lone_link_is_segment():
    m = [0] * E
    m[1] = 1
    assert [c.kind for c in classify_paths(EXT, PathWeb(tuple(m), (None,) * V))] == ["segment"]


@pytest.mark.parametrize("N,lam", [(1, Fraction(1)), (2, Fraction(1, 2))])
def test_lemma_components_small(N, lam):
    assert verify_lemma_components(EXT, N, lam).passed


def test_zero_field_gives_loop_partition_function():
    for N, lam in [(1, Fraction(1)), (2, Fraction(2))]:
        assert central_quantity(EXT, N, lam, [0] * V) == partition_lambda(EXT.base, N, lam).value


def test_expansion_unit_vector_and_constant():
    v = [1, 0, 0, 0]
    assert polynomial_expansion_check(EXT, 1, 1, h_from_v(EXT.base, v)).passed
    rep = polynomial_expansion_check(EXT, 2, 2, h_from_v(EXT.base, [Fraction(2, 3)] * 4))
    assert rep.passed and rep.details["c2"] == "0"
    v = [Fraction(1, 3), Fraction(-2, 5), Fraction(7, 2), 0]
    assert polynomial_expansion_check(EXT, 2, 2, h_from_v(EXT.base, v)).passed


def test_chessboard_constant_and_single_entry():
    h = np.array([0.3] * 4 + [-0.6] * 4)
    rep = chessboard_check(EXT, 1, 1, h)
    assert rep.passed and abs(rep.details["margin"]) < 1e-12
    h = np.zeros(V)
    h[2] = 0.7
    assert chessboard_check(EXT, 1, 1, h).passed
    with pytest.raises(ValueError):
        chessboard_check(EXT, 1, 1, np.full(V, 1.5))


def test_rp_constant_and_indicator():
    plane = ReflectionPlane(EXT.base, 1, Fraction(1, 2))
    one = lambda key: 1
    rep = reflection_positivity_check(EXT, 1, 1, plane, [(one, one)])
    assert rep.passed
    target = {}

    def indicator(key):
        target.setdefault("k", key)
        return int(key == target["k"])
    assert reflection_positivity_check(EXT, 1, 1, plane, [(indicator, one)]).passed


def test_key_inequality_constant_and_cosine():
    g = TorusGeom(2, 4)
    assert key_inequality_check(g, 2, 0, [3] * g.n).passed
    table = two_point_table(g, 2, 0)
    G, _, _ = g_arrays(g, 2, 0, table)
    ghat = dft(g, G).real()
    ks = dual_points(g)
    s = g.site_index((1, 0))
    k = ks[s]
    v = np.cos(g.coord_array @ k)
    rep = key_inequality_check(g, 2, 0, list(v), table)
    assert rep.passed
    # for a cosine mode the two sides reduce to the high-frequency bound at k
    assert ghat[s] <= 1 / epsilon(k) + 1e-12
