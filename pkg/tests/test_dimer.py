from fractions import Fraction

import pytest

from lattperm.dimer import (count_covers, count_covers_backtracking, count_covers_transfer, enumerate_covers,
                            monomer_correlation_table)
from lattperm.torus import TorusGeom


def test_four_cycle_has_two_covers():
    g = TorusGeom(1, 4)
    assert count_covers_backtracking(g) == 2
    assert len(list(enumerate_covers(g))) == 2


def test_frozen_counts():
    # exhaustive backtracking oracle, cross-checked by the transfer counter below
    assert count_covers_backtracking(TorusGeom(2, 4)) == 272
    assert count_covers_backtracking(TorusGeom(2, 6)) == 90176


@pytest.mark.parametrize("L", [4, 6])
def test_counters_agree_d2(L):
    g = TorusGeom(2, L)
    assert count_covers_transfer(g) == count_covers_backtracking(g)
    rem = (g.origin, g.unit(2, 3))
    assert count_covers_transfer(g, rem) == count_covers_backtracking(g, rem)


def test_even_removal_gives_zero():
    g = TorusGeom(2, 4)
    x = g.site_index((1, 1))
    assert count_covers(g, (g.origin, x)) == 0


def test_enumeration_matches_count():
    g = TorusGeom(2, 4)
    covers = list(enumerate_covers(g))
    assert len(covers) == 272
    for c in covers[:20]:
        assert all(c.partner[c.partner[s]] == s for s in range(g.n))


def test_monomer_correlation_values():
    g1 = TorusGeom(1, 4)
    assert monomer_correlation_table(g1)[g1.unit(1)] == Fraction(1, 2)
    g = TorusGeom(2, 4)
    xi = monomer_correlation_table(g)
    assert xi[g.unit(1)] == Fraction(1, 4)
    assert all(xi[s] == 0 for s in g.even_sites)
    assert max(xi.values()) <= Fraction(1, 4)
