import numpy as np
import pytest
from scipy.special import ive
from scipy.integrate import quad

from lattperm.permutation import two_point_table
from lattperm.rwalk import r_quadrature
from lattperm.spectral import (dft, epsilon, high_frequency_check, i_l, idft, infrared_check, mode_difference_identity,
                               parity_symmetry_check, psi, psi_symmetrisation_check, upsilon_complex, upsilon_direct,
                               upsilon_l)
from lattperm.torus import TorusGeom


def test_dft_basic_cases():
    g = TorusGeom(2, 4)
    delta = np.zeros(g.n)
    delta[g.origin] = 1
    assert np.allclose(dft(g, delta).values, 1)
    spec = dft(g, np.ones(g.n)).values
    want = np.zeros(g.n)
    want[g.origin] = g.n
    assert np.allclose(spec, want)


def test_dft_round_trip():
    g = TorusGeom(2, 6)
    f = np.random.default_rng(0).normal(size=g.n)
    assert np.max(np.abs(idft(dft(g, f)) - f)) < 1e-10


def test_epsilon():
    assert epsilon([np.pi, 0]) == pytest.approx(4)


@pytest.mark.parametrize("d,L,N,rho", [(2, 4, 2, 0), (1, 4, 1, 0), (2, 4, 2, 1)])
def test_checks_small(d, L, N, rho):
    g = TorusGeom(d, L)
    for fn in (high_frequency_check, parity_symmetry_check, mode_difference_identity, infrared_check):
        assert fn(g, N, rho).passed, fn.__name__


def test_mode_difference_rho_half():
    assert mode_difference_identity(TorusGeom(1, 6), 1, "1/2").passed


def test_mode_difference_delta():
    g = TorusGeom(2, 4)
    delta = {s: 0 for s in range(g.n)}
    delta[g.origin] = 1
    assert mode_difference_identity(g, 2, 0, delta).passed


def test_upsilon_direct_matches_factorized():
    for d, L in [(1, 6), (2, 4), (2, 6)]:
        assert np.max(np.abs(upsilon_complex(d, L) - upsilon_direct(d, L))) < 1e-12
    g = TorusGeom(2, 6)
    assert upsilon_l(2, 6)[g.unit(1)] == pytest.approx(1)


def test_psi_is_bijection():
    for L in (4, 6, 8):
        g = TorusGeom(2, L)
        assert psi_symmetrisation_check(g).passed
    g = TorusGeom(2, 4)
    assert psi(g, g.origin) != g.origin


def test_il_increases_with_L():
    vals = [i_l(3, L) for L in (16, 32, 64)]
    assert vals[0] < vals[1] < vals[2]


def test_watson_bessel_oracle():
    # G(0) = int_0^inf e^{-t} I_0(t/3)^3 dt for the simple walk on Z^3
    g0, _ = quad(lambda t: ive(0, t / 3) ** 3, 0, np.inf, limit=400)
    assert r_quadrature(3).value == pytest.approx(g0 - 1, abs=1e-6)
