"""Acceptance criteria 1-15, one test each; every test prints a single PASS/FAIL line."""

from __future__ import annotations

import random
import time
from fractions import Fraction

import numpy as np
import pytest

from lattperm.dimer import count_covers_backtracking, count_covers_transfer, monomer_correlation_table
from lattperm.pathweb import (chessboard_check, h_from_v, key_inequality_check, polynomial_expansion_check,
                              reflection_positivity_check, seeded_function, verify_lemma_components)
from lattperm.permutation import two_point_table
from lattperm.rwalk import r_montecarlo, r_quadrature
from lattperm.spectral import (high_frequency_check, i_l, infrared_check, mode_difference_identity,
                               parity_symmetry_check, psi_symmetrisation_check)
from lattperm.torus import ExtendedTorusGeom, TorusGeom, all_planes
from lattperm.worm import decay_profile, worm_run

SPECTRAL_SET = [(1, 4), (2, 4), (2, 6)]


def report(num: int, ok: bool, text: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {text}")


def test_criterion_01_dimer_permutation_identity():
    t = time.perf_counter()
    bad = []
    for d, L in [(1, 4), (2, 4)]:
        g = TorusGeom(d, L)
        xi = monomer_correlation_table(g)
        gp = two_point_table(g, 2, 0)
        bad += [(d, L, s) for s in range(g.n) if xi[s] != gp[s]]
    el = time.perf_counter() - t
    ok = not bad and el < 60
    report(1, ok, f"G_(L,2,0) = Xi_L at every site, (1,4),(2,4); mismatches={len(bad)}; {el:.1f}s (< 60s)")
    assert ok


@pytest.mark.slow
def test_criterion_02_precise_value():
    t = time.perf_counter()
    vals = {}
    for d, L in [(1, 4), (2, 4), (2, 6)]:
        g = TorusGeom(d, L)
        for N in (1, 2, 3):
            vals[(d, L, N)] = two_point_table(g, N, 0)[g.unit(1)]
    el = time.perf_counter() - t
    wrong = {k: str(v) for k, v in vals.items() if v != Fraction(1, k[0] * k[2])}
    ok = not wrong and el < 300
    report(2, ok, f"G_(L,N,0)(e1) = 1/(dN) for N in 1..3 on (1,4),(2,4),(2,6); wrong={wrong}; {el:.1f}s (< 300s)")
    assert ok


def test_criterion_03_even_sector_vanishes():
    bad = []
    for d, L in [(1, 4), (2, 4), (2, 6)]:
        g = TorusGeom(d, L)
        for N in (1, 2, 3):
            t = two_point_table(g, N, 0)
            bad += [(d, L, N, s) for s in g.even_sites if t[s] != 0]
    ok = not bad
    report(3, ok, f"G_(L,N,0)(x) = 0 exactly at every even x, same set; nonzero={len(bad)}")
    assert ok


def test_criterion_04_pointwise_bound():
    maxima = {}
    for d, L in [(1, 4), (1, 6), (2, 4), (2, 6)]:
        xi = monomer_correlation_table(TorusGeom(d, L))
        maxima[(d, L)] = max(xi.values())
    ok = all(v <= Fraction(1, 2 * k[0]) for k, v in maxima.items())
    report(4, ok, "Xi_L(x) <= 1/(2d) exactly; maxima " + ", ".join(f"{k}:{v}" for k, v in maxima.items()))
    assert ok


def test_criterion_05_key_inequality():
    t = time.perf_counter()
    g = TorusGeom(2, 4)
    rng = random.Random(20261019)
    failures = 0
    checked = 0
    for N in (1, 2, 3):
        for rho in (Fraction(0), Fraction(1, 2), Fraction(1)):
            table = two_point_table(g, N, rho)
            for _ in range(100):
                v = [rng.randint(-10, 10) for _ in range(g.n)]
                rep = key_inequality_check(g, N, rho, v, table)
                checked += 1
                failures += not rep.passed
    el = time.perf_counter() - t
    ok = failures == 0 and el < 600
    report(5, ok, f"Key Inequality exact, (2,4), N in 1..3, rho in 0,1/2,1: {checked} vectors, "
                  f"{failures} violations; {el:.1f}s (< 600s)")
    assert ok


def test_criterion_06_lemma_components():
    t = time.perf_counter()
    fails = []
    for L in (4, 6):
        ext = ExtendedTorusGeom(TorusGeom(1, L))
        for N in (1, 2):
            for lam in (Fraction(1), Fraction(1, 2), Fraction(2)):
                rep = verify_lemma_components(ext, N, lam)
                if not rep.passed:
                    fails.append((L, N, str(lam), rep.witnesses[:2]))
    el = time.perf_counter() - t
    ok = not fails and el < 600
    report(6, ok, f"closed/segment/walk identities exact, d=1 L in 4,6, N in 1,2, lambda in 1,1/2,2, "
                  f"all edge and directed-edge arguments; failures={fails}; {el:.1f}s (< 600s)")
    assert ok


@pytest.mark.slow
def test_criterion_07_polynomial_expansion():
    ext = ExtendedTorusGeom(TorusGeom(1, 4))
    rng = random.Random(7)
    fails = []
    for N in (1, 2):
        for i in range(20):
            v = [Fraction(rng.randint(-12, 12), rng.randint(1, 7)) for _ in range(4)]
            rep = polynomial_expansion_check(ext, N, 1, h_from_v(ext.base, v))
            if not rep.passed or rep.details["odd_nonzero"]:
                fails.append((N, i, rep.witnesses))
        const = polynomial_expansion_check(ext, N, 1, h_from_v(ext.base, [Fraction(3, 2)] * 4))
        if not const.passed or const.details["c2"] != "0":
            fails.append((N, "constant", const.details))
    ok = not fails
    report(7, ok, f"coefficients of Z(phi h^v) equal (Y^l, 0, Z2(h^v)) for 20 rational v, N in 1,2, "
                  f"constant v gives Z2 = 0; failures={len(fails)}")
    assert ok


def test_criterion_08_chessboard():
    ext = ExtendedTorusGeom(TorusGeom(1, 4))
    hs = np.random.default_rng(8).uniform(-1, 1, (100, ext.vertex_count))
    reps = [chessboard_check(ext, 1, 1, h, tol=1e-12) for h in hs]
    margins = [r.details.get("margin", np.inf) for r in reps]
    ok = all(r.passed for r in reps)
    report(8, ok, f"chessboard estimate, 100 h in [-1,1], d=1 L=4 N=1 lambda=1, log tolerance 1e-12; "
                  f"min log margin {min(margins):.3e}")
    assert ok


@pytest.mark.slow
def test_criterion_09_reflection_positivity():
    ext = ExtendedTorusGeom(TorusGeom(1, 4))
    results = []
    for k, plane in enumerate(all_planes(ext.base)):
        fs = [(seeded_function(1000 * k + 2 * i), seeded_function(1000 * k + 2 * i + 1)) for i in range(50)]
        results.append(reflection_positivity_check(ext, 1, 1, plane, fs))
    ok = all(r.passed for r in results)
    report(9, ok, f"mu(f Theta f) >= 0 and mu(f Theta g) = mu(g Theta f), 50 seeded (f,g) per plane, "
                  f"{len(results)} planes, d=1 L=4 N=1; exact")
    assert ok


def _tables():
    for d, L in SPECTRAL_SET:
        g = TorusGeom(d, L)
        for N in (1, 2):
            for rho in (0, 1):
                yield g, N, rho, two_point_table(g, N, rho)


def test_criterion_10_high_frequency():
    reps = [high_frequency_check(g, N, rho, t, tol=1e-10) for g, N, rho, t in _tables()]
    worst = min(r.details["min_margin"] for r in reps)
    ok = all(r.passed for r in reps)
    report(10, ok, f"G_hat(k) <= 1/eps(k) at all k != o, {len(reps)} parameter points; min margin {worst:.3e}")
    assert ok


def test_criterion_11_mode_difference_and_symmetries():
    fails = []
    for g, N, rho, t in _tables():
        for rep in (mode_difference_identity(g, N, rho, t, tol=1e-10), parity_symmetry_check(g, N, rho, t, tol=1e-10),
                    psi_symmetrisation_check(g, N, rho, t, tol=1e-10)):
            if not rep.passed:
                fails.append((g.d, g.L, N, rho, rep.check))
    for L in (4, 6, 8):
        rep = psi_symmetrisation_check(TorusGeom(2, L))
        if not rep.passed:
            fails.append((2, L, "psi bijection"))
    ok = not fails
    report(11, ok, f"mode-difference identity, realness and pi-shift symmetries to 1e-10; Psi bijection "
                   f"d=2 L in 4,6,8; failures={fails}")
    assert ok


def test_criterion_12_infrared_bound():
    reps = [infrared_check(g, N, rho, t, tol=1e-9) for g, N, rho, t in _tables()]
    worst = min(r.details["margin"] for r in reps)
    ok = all(r.passed for r in reps)
    report(12, ok, f"finite-L infrared-ultraviolet inequality, {len(reps)} points, tolerance 1e-9; "
                   f"min margin {worst:.3e}")
    assert ok


@pytest.mark.slow
def test_criterion_13_watson_constant():
    t = time.perf_counter()
    q = r_quadrature(3)
    in_range = 0.51 < q.value < 0.52
    mc = r_montecarlo(3, trials=2 * 10 ** 5, max_steps=10 ** 5, seed=13)
    z = abs(mc.details["value_plus_tail"] - q.value) / mc.err
    il = i_l(3, 64)
    gap = abs(il - q.value / 12) / (q.value / 12)
    el = time.perf_counter() - t
    ok = in_range and z <= 3 and gap < 0.01 and el < 600
    report(13, ok, f"quadrature r3={q.value:.7f} in (0.51,0.52): {in_range}; MC {mc.value:.5f}+tail "
                   f"{mc.details['truncation_tail_estimate']:.5f} (stderr {mc.err:.5f}) z={z:.2f} <= 3: {z <= 3}; "
                   f"I_64(3)={il:.5f} vs r3/12={q.value / 12:.5f}, relative gap {gap:.3f} < 0.01: {gap < 0.01}; "
                   f"{el:.0f}s (< 600s)")
    assert ok


@pytest.mark.slow
def test_criterion_14_worm():
    t = time.perf_counter()
    g6 = TorusGeom(2, 6)
    exact = monomer_correlation_table(g6)
    r6 = worm_run(g6, sweeps=40000, therm=2000, seed=14)
    zs = [abs(r6.xi[s] - float(exact[s])) / r6.stderr[s] for s in g6.odd_sites if r6.stderr[s] > 0]
    small_ok = max(zs) <= 3
    g64 = TorusGeom(2, 64)
    r64 = worm_run(g64, sweeps=20000, therm=2000, seed=15)
    p64 = decay_profile(g64, r64.xi, r64.stderr)
    fit_ok = -0.7 <= p64.exponent <= -0.3
    g3 = TorusGeom(3, 16)
    r3 = worm_run(g3, sweeps=20000, therm=2000, seed=16)
    p3 = decay_profile(g3, r3.xi, r3.stderr)
    floor_ok = p3.minimum > 0.5 * r3.xi[g3.unit(1)]
    el = time.perf_counter() - t
    ok = small_ok and fit_ok and floor_ok and el < 3600
    report(14, ok, f"d=2 L=6 max |z| over odd x {max(zs):.2f} <= 3; d=2 L=64 exponent "
                   f"{p64.exponent:.3f}+-{p64.exponent_err:.3f} in [-0.7,-0.3]; d=3 L=16 axis min "
                   f"{p3.minimum:.4f} > {0.5 * r3.xi[g3.unit(1)]:.4f}; {el:.0f}s (< 3600s)")
    assert ok


@pytest.mark.slow
def test_criterion_15_counter_cross_validation():
    t = time.perf_counter()
    rows = []
    for d, L in [(2, 4), (2, 6), (2, 8), (3, 4)]:
        g = TorusGeom(d, L)
        rems = [(), (g.origin, g.unit(1))]
        if g.n <= 36:
            rems.append((g.origin, g.add(g.unit(1), g.add(g.unit(2), g.unit(2)))))
        for rem in rems:
            a = count_covers_backtracking(g, rem)
            b = count_covers_transfer(g, rem)
            rows.append((d, L, rem, a, b))
    el = time.perf_counter() - t
    bad = [r for r in rows if r[3] != r[4]]
    ok = not bad and el < 900
    d3 = [r[3] for r in rows if r[0] == 3]
    report(15, ok, f"backtracking = transfer on {len(rows)} instances incl. d=3 L=4 ({d3}); "
                   f"mismatches={len(bad)}; {el:.0f}s (< 900s)")
    assert ok
