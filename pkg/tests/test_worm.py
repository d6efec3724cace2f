import numpy as np
import pytest

from lattperm.dimer import monomer_correlation_table
from lattperm.torus import TorusGeom
from lattperm.worm import decay_profile, stationarity_check, worm_run


def test_seed_determinism():
    g = TorusGeom(2, 6)
    a = worm_run(g, 500, 50, seed=3)
    b = worm_run(g, 500, 50, seed=3)
    assert np.array_equal(a.hist, b.hist)
    assert a.to_csv() == b.to_csv()
    c = worm_run(g, 500, 50, seed=4)
    assert not np.array_equal(a.hist, c.hist)


def test_normalisation_and_parity():
    g = TorusGeom(2, 6)
    r = worm_run(g, 2000, 100, seed=1)
    assert r.xi[g.unit(1)] == pytest.approx(0.25)
    assert all(r.xi[s] == 0 for s in g.even_sites)


def test_agrees_with_exact_small():
    g = TorusGeom(2, 6)
    ex = monomer_correlation_table(g)
    r = worm_run(g, 20000, 1000, seed=2)
    z = [abs(r.xi[s] - float(ex[s])) / r.stderr[s] for s in g.odd_sites if r.stderr[s] > 0]
    assert max(z) < 4.5


def test_closed_sector_uniform():
    res = stationarity_check(TorusGeom(2, 4), 4 * 10 ** 6, seed=5)
    assert res["covers"] == 272
    assert res["passed"]


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        worm_run(TorusGeom(1, 6), 10, 1, 0)
    with pytest.raises(ValueError):
        worm_run(TorusGeom(2, 6), 10, 1, 0, batches=5)


def test_csv_and_profile():
    g = TorusGeom(2, 8)
    r = worm_run(g, 2000, 100, seed=0)
    head = r.to_csv().splitlines()[0]
    assert head == "x_1,x_2,xi_hat,stderr"
    p = decay_profile(g, r.xi, r.stderr, n_max=3, n_min=1)
    assert p.n == [1, 3]
    assert r.metadata()["sweeps"] == 2000
