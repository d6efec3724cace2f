import pytest

from lattperm.rwalk import (half_step_integral, lattice_partial_sum_integral, n_window, partial_sum_identity,
                            r_montecarlo, r_quadrature, return_probabilities_dp)


def test_quadrature_range_and_monotone():
    r3 = r_quadrature(3).value
    assert 0.51 < r3 < 0.52
    assert r_quadrature(4).value < r3


def test_recurrent_dimension_rejected():
    with pytest.raises(ValueError):
        r_quadrature(2)
    with pytest.raises(ValueError):
        r_montecarlo(2, trials=10, max_steps=10)


def test_montecarlo_deterministic_and_ordered():
    a = r_montecarlo(3, trials=2000, max_steps=2000, seed=4)
    b = r_montecarlo(3, trials=2000, max_steps=2000, seed=4)
    assert a.value == b.value and a.err == b.err
    c = r_montecarlo(5, trials=2000, max_steps=2000, seed=4)
    assert c.value < a.value


def test_montecarlo_near_quadrature():
    q = r_quadrature(3).value
    mc = r_montecarlo(3, trials=20000, max_steps=20000, seed=1)
    assert abs(mc.details["value_plus_tail"] - q) < 4 * mc.err


def test_partial_sums():
    assert return_probabilities_dp(3, 1)[1] == pytest.approx(1 / 6)
    r0 = partial_sum_identity(3, 0)
    assert r0.passed and abs(r0.lhs) < 1e-12
    r1 = partial_sum_identity(3, 1)
    assert r1.passed and r1.lhs == pytest.approx(1 / 6)
    assert partial_sum_identity(3, 10).passed
    assert lattice_partial_sum_integral(3, 1) == pytest.approx(1 / 6, rel=1e-6)
    assert half_step_integral(3, 64, 1) > 0


def test_n_window():
    w = n_window(0.5164)
    assert w["N_max"] == 7
