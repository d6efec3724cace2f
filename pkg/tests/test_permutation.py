from fractions import Fraction

from lattperm.dimer import monomer_correlation_table
from lattperm.permutation import (bijection_check_dimers, box_probability, enumerate_omega_ell, enumerate_omega_xy,
                                  lambda_two_point_relation, monotonicity_check, partition_directed, partition_ell,
                                  partition_lambda, target_law, two_point, two_point_table)
from lattperm.torus import TorusGeom

G1 = TorusGeom(1, 4)


def test_four_cycle_configurations():
    cfgs = list(enumerate_omega_ell(G1))
    assert len(cfgs) == 9
    assert sum(c.M == 0 for c in cfgs) == 4
    walks = [c for c in enumerate_omega_xy(G1, G1.origin, G1.unit(1)) if c.M == 0]
    assert len(walks) == 2


def test_partition_functions_four_cycle():
    assert partition_ell(G1, 2, 1) == 9
    assert partition_ell(G1, 2, 0) == 4
    assert partition_directed(G1, 2, 0, G1.origin, G1.unit(1)) == 2
    assert partition_directed(G1, 2, 0, G1.origin, G1.origin) == 0
    assert two_point(G1, 2, 0, G1.origin, G1.unit(1)) == Fraction(1, 2)


def test_enumeration_and_transfer_agree():
    g = TorusGeom(2, 4)
    for N, rho in [(1, Fraction(1, 2)), (3, Fraction(1))]:
        assert partition_ell(g, N, rho, "enumerate") == partition_ell(g, N, rho, "transfer")
        x = g.site_index((1, 2))
        assert (partition_directed(g, N, rho, g.origin, x, "enumerate")
                == partition_directed(g, N, rho, g.origin, x, "transfer"))


def test_rho_one_counts_configurations():
    g = TorusGeom(2, 4)
    assert partition_ell(g, 2, 1) == sum(1 for _ in enumerate_omega_ell(g, cap=None))


def test_lambda_parametrization():
    assert partition_lambda(G1, 2, 1).value == partition_ell(G1, 2, 1)
    r = partition_lambda(G1, 2, 2)
    assert r.holds and r.value == 16 * partition_ell(G1, 2, Fraction(1, 2))
    assert lambda_two_point_relation(TorusGeom(2, 4), 2, Fraction(3, 2), 0, 5)


def test_two_point_is_dimer_correlation():
    g = TorusGeom(2, 4)
    assert two_point_table(g, 2, 0) == monomer_correlation_table(g)


def test_bijection_and_monotonicity():
    assert bijection_check_dimers(TorusGeom(2, 4)).ok
    assert monotonicity_check(TorusGeom(2, 6), 2).ok


def test_target_law_normalised():
    g = TorusGeom(2, 4)
    law = target_law(g, 2, 0)
    assert sum(law.values()) == 1
    box = box_probability(g, 2, 0)
    assert box["volume_fraction"] == Fraction(9, 16)
    assert 0 < box["p_box"] <= 1
