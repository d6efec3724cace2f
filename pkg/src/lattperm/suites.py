"""Verification suites behind `verify all`, grouped by cost tier."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

TIERS = ("fast", "full", "mc")


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    t = time.perf_counter()
    ok, det = fn()
    return CheckResult(name, bool(ok), round(time.perf_counter() - t, 3), det)


def _dimer_identity(d: int, L: int):
    from .dimer import monomer_correlation_table
    from .permutation import two_point_table
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    xi = monomer_correlation_table(g)
    gp = two_point_table(g, 2, 0)
    bad = [list(g.coords(s)) for s in range(g.n) if s != g.origin and xi[s] != gp[s]]
    return not bad, {"d": d, "L": L, "mismatch": bad[:5]}


def _precise_value(d: int, L: int, N: int):
    from .permutation import two_point_table
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    t = two_point_table(g, N, 0)
    val = t[g.unit(1)]
    even = [list(g.coords(s)) for s in g.even_sites if t[s] != 0]
    return val == Fraction(1, d * N) and not even, {"d": d, "L": L, "N": N, "G_e1": str(val), "even_nonzero": even[:5]}


def _pointwise(d: int, L: int):
    from .dimer import monomer_correlation_table
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    xi = monomer_correlation_table(g)
    mx = max(xi.values())
    return mx <= Fraction(1, 2 * d), {"d": d, "L": L, "max_xi": str(mx)}


def _components(L: int, N: int, lam):
    from .pathweb import verify_lemma_components
    from .torus import ExtendedTorusGeom, TorusGeom
    r = verify_lemma_components(ExtendedTorusGeom(TorusGeom(1, L)), N, lam)
    return r.passed, {"L": L, "N": N, "lambda": str(lam), "witnesses": r.witnesses}


def _key(d: int, L: int, N: int, rho, count: int, seed: int):
    from .pathweb import key_inequality_check
    from .permutation import two_point_table
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    table = two_point_table(g, N, rho)
    rng = random.Random(seed)
    for _ in range(count):
        v = [rng.randint(-5, 5) for _ in range(g.n)]
        r = key_inequality_check(g, N, rho, v, table)
        if not r.passed:
            return False, r.witnesses[0]
    return True, {"vectors": count}


def _spectral(d: int, L: int, N: int, rho):
    from .permutation import two_point_table
    from .spectral import (high_frequency_check, infrared_check, mode_difference_identity,
                           parity_symmetry_check)
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    t = two_point_table(g, N, rho)
    reps = [f(g, N, rho, t) for f in (high_frequency_check, parity_symmetry_check, mode_difference_identity,
                                       infrared_check)]
    return all(r.passed for r in reps), {r.check: r.passed for r in reps}


def _psi(L: int):
    from .spectral import psi_symmetrisation_check
    from .torus import TorusGeom
    r = psi_symmetrisation_check(TorusGeom(2, L))
    return r.passed, {"L": L, "domain": r.details["domain"]}


def _watson():
    from .rwalk import r_quadrature
    q = r_quadrature(3)
    return 0.51 < q.value < 0.52 and q.details["richardson_ok"], q.as_dict()


def _partial_sums():
    from .rwalk import partial_sum_identity
    reps = [partial_sum_identity(3, m) for m in (0, 1, 10)]
    return all(r.passed for r in reps), {"m": [r.m for r in reps], "lhs": [r.lhs for r in reps]}


def _dimer_methods(d: int, L: int, removed_x: bool):
    from .dimer import count_covers_backtracking, count_covers_transfer
    from .torus import TorusGeom
    g = TorusGeom(d, L)
    rem = (g.origin, g.unit(1)) if removed_x else ()
    a, b = count_covers_backtracking(g, rem), count_covers_transfer(g, rem)
    return a == b, {"d": d, "L": L, "removed": list(rem), "backtracking": a, "transfer": b}


def _il_trend():
    from .rwalk import r_quadrature
    from .spectral import i_l
    r3 = r_quadrature(3).value
    vals = [i_l(3, L) for L in (16, 32, 64)]
    target = r3 / 12
    gap = abs(vals[-1] - target) / target
    return gap < 0.01, {"I_L": vals, "r3_over_12": target, "relative_gap": gap}


def _expansion_chessboard():
    import numpy as np
    from .pathweb import chessboard_check, h_from_v, polynomial_expansion_check
    from .torus import ExtendedTorusGeom, TorusGeom
    ext = ExtendedTorusGeom(TorusGeom(1, 4))
    rng = random.Random(5)
    for N in (1, 2):
        v = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(4)]
        if not polynomial_expansion_check(ext, N, 1, h_from_v(ext.base, v)).passed:
            return False, {"expansion": "failed", "N": N}
    hs = np.random.default_rng(5).uniform(-1, 1, (10, 8))
    ok = all(chessboard_check(ext, 1, 1, h).passed for h in hs)
    return ok, {"chessboard_samples": 10}


def _worm_small():
    from .dimer import monomer_correlation_table
    from .torus import TorusGeom
    from .worm import worm_run
    g = TorusGeom(2, 6)
    ex = monomer_correlation_table(g)
    r = worm_run(g, 20000, 1000, 1)
    worst = max(abs(r.xi[s] - float(ex[s])) / r.stderr[s] for s in g.odd_sites if r.stderr[s] > 0)
    return worst <= 3, {"max_z": float(worst)}


def _worm_decay():
    from .torus import TorusGeom
    from .worm import decay_profile, worm_run
    g2 = TorusGeom(2, 64)
    r2 = worm_run(g2, 20000, 2000, 2)
    p2 = decay_profile(g2, r2.xi, r2.stderr)
    g3 = TorusGeom(3, 16)
    r3 = worm_run(g3, 20000, 2000, 3)
    p3 = decay_profile(g3, r3.xi, r3.stderr)
    ok = -0.7 <= p2.exponent <= -0.3 and p3.minimum > 0.5 * r3.xi[g3.unit(1)]
    return ok, {"exponent_d2": p2.exponent, "min_d3": p3.minimum}


def _rwalk_mc():
    from .rwalk import r_montecarlo, r_quadrature
    q = r_quadrature(3).value
    mc = r_montecarlo(3, 2 * 10 ** 5, 10 ** 5, 1)
    z = abs(mc.details["value_plus_tail"] - q) / mc.err
    return z <= 3, {"mc": mc.value, "tail": mc.details["truncation_tail_estimate"], "quad": q, "z": z}


def suite(tier: str) -> list[tuple[str, Callable[[], tuple[bool, dict]]]]:
    if tier not in TIERS:
        raise ValueError(f"tier must be one of {TIERS}")
    checks: list = []
    for d, L in ((1, 4), (2, 4)):
        checks.append((f"dimer-permutation identity d={d} L={L}", lambda d=d, L=L: _dimer_identity(d, L)))
    for d, L in ((1, 4), (2, 4)):
        for N in (1, 2, 3):
            checks.append((f"G(e1)=1/(dN), even sector d={d} L={L} N={N}",
                           lambda d=d, L=L, N=N: _precise_value(d, L, N)))
    for d, L in ((1, 4), (1, 6), (2, 4)):
        checks.append((f"Xi <= 1/(2d) d={d} L={L}", lambda d=d, L=L: _pointwise(d, L)))
    checks.append(("path components d=1 L=4 N=1", lambda: _components(4, 1, 1)))
    checks.append(("key inequality d=2 L=4 N=2 rho=0", lambda: _key(2, 4, 2, 0, 10, 1)))
    for d, L in ((1, 4), (2, 4)):
        for N, rho in ((1, 0), (2, 1)):
            checks.append((f"spectral d={d} L={L} N={N} rho={rho}",
                           lambda d=d, L=L, N=N, rho=rho: _spectral(d, L, N, rho)))
    for L in (4, 6, 8):
        checks.append((f"Psi bijection d=2 L={L}", lambda L=L: _psi(L)))
    checks.append(("Watson constant quadrature", _watson))
    checks.append(("partial-sum identity d=3", _partial_sums))
    if tier in ("full", "mc"):
        for N in (1, 2, 3):
            checks.append((f"G(e1)=1/(dN) d=2 L=6 N={N}", lambda N=N: _precise_value(2, 6, N)))
        checks.append(("Xi <= 1/(2d) d=2 L=6", lambda: _pointwise(2, 6)))
        for N in (1, 2):
            for lam in (Fraction(1), Fraction(1, 2), Fraction(2)):
                checks.append((f"path components d=1 L=6 N={N} lambda={lam}",
                               lambda N=N, lam=lam: _components(6, N, lam)))
        checks.append(("expansion and chessboard d=1 L=4", _expansion_chessboard))
        checks.append(("dimer counters d=3 L=4", lambda: _dimer_methods(3, 4, False)))
        checks.append(("dimer counters d=3 L=4 with {o,e1} removed", lambda: _dimer_methods(3, 4, True)))
        checks.append(("I_L(3) trend toward r_3/12", _il_trend))
    if tier == "mc":
        checks.append(("worm d=2 L=6 vs exact", _worm_small))
        checks.append(("worm decay profiles", _worm_decay))
        checks.append(("Watson constant Monte Carlo", _rwalk_mc))
    return checks


def run_suite(tier: str, progress: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    out = []
    for name, fn in suite(tier):
        try:
            res = _timed(name, fn)
        except Exception as exc:  # a crashing check counts as a failed verification
            res = CheckResult(name, False, 0.0, {"error": f"{type(exc).__name__}: {exc}"})
        out.append(res)
        if progress:
            progress(res)
    return out
