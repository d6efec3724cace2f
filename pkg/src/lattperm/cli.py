"""Command-line front end.

Exit codes: 0 success, 1 failed verification (JSON witness on stdout), 2 usage error.
Set LATTPERM_THREADS to cap numba threads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .torus import ExtendedTorusGeom, GeometryError, TorusGeom, all_planes, parse_site

SCHEMA = "lattperm.report/1"


class UsageError(Exception):
    pass


# output helpers -------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    return x


def dumps(payload: dict) -> str:
    body = {"schema": SCHEMA, "version": __version__, **payload}
    return json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# argument parsing ------------------------------------------------------------------

def rational(text: str) -> Fraction:
    try:
        val = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational 'p/q', got {text!r}")
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"give rationals as 'p/q' (got {text!r})")
    return val


def side(text: str) -> int:
    try:
        L = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"L must be an integer, got {text!r}")
    if L < 4:
        raise argparse.ArgumentTypeError(f"L={L} rejected: side length must satisfy L >= 4 (L=2 gives a multigraph)")
    if L % 2:
        raise argparse.ArgumentTypeError(f"L={L} rejected: side length must be even")
    return L


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _geom_args(p, d_default=None):
    p.add_argument("--d", type=positive, required=d_default is None, default=d_default)
    p.add_argument("--L", type=side, required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lattperm", description="Dimers and lattice permutations on tori.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="group", required=True)

    dm = sub.add_parser("dimer").add_subparsers(dest="cmd", required=True)
    p = dm.add_parser("count", help="number of dimer covers")
    _geom_args(p)
    p.add_argument("--remove", action="append", default=[], help="site 'x1,...,xd' to delete (repeatable)")
    p.add_argument("--method", choices=["auto", "backtracking", "transfer"], default="auto")
    p.add_argument("--out")
    p = dm.add_parser("xi", help="monomer correlation table")
    _geom_args(p)
    p.add_argument("--out")

    pm = sub.add_parser("perm").add_subparsers(dest="cmd", required=True)
    for name in ("zf", "g", "target-law"):
        p = pm.add_parser(name)
        _geom_args(p)
        p.add_argument("--N", type=positive, required=True)
        p.add_argument("--rho", type=rational, required=True)
        p.add_argument("--out")
        if name == "g":
            p.add_argument("--x", action="append", default=[], help="site 'x1,...,xd' (repeatable; default all)")

    pw = sub.add_parser("pathweb").add_subparsers(dest="cmd", required=True)
    p = pw.add_parser("verify")
    p.add_argument("--check", choices=["components", "expansion", "chessboard", "rp", "key"], required=True)
    _geom_args(p)
    p.add_argument("--N", type=positive, required=True)
    p.add_argument("--lambda", dest="lam", type=rational, default=Fraction(1))
    p.add_argument("--rho", type=rational, default=Fraction(0), help="for --check key")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=positive, default=20)
    p.add_argument("--out")

    sp = sub.add_parser("spec").add_subparsers(dest="cmd", required=True)
    p = sp.add_parser("il")
    _geom_args(p)
    p.add_argument("--out")
    p = sp.add_parser("upsilon")
    _geom_args(p)
    p.add_argument("--out")
    p = sp.add_parser("dft", help="spectrum of G as CSV")
    _geom_args(p)
    p.add_argument("--N", type=positive, required=True)
    p.add_argument("--rho", type=rational, required=True)
    p.add_argument("--sector", choices=["G", "Go", "Ge"], default="G")
    p.add_argument("--out")
    p = sp.add_parser("verify")
    p.add_argument("--check", choices=["hf", "parity", "modediff", "psi", "infrared"], required=True)
    _geom_args(p)
    p.add_argument("--N", type=positive)
    p.add_argument("--rho", type=rational, default=Fraction(0))
    p.add_argument("--out")

    rw = sub.add_parser("rwalk").add_subparsers(dest="cmd", required=True)
    p = rw.add_parser("r")
    p.add_argument("--d", type=positive, required=True)
    p.add_argument("--method", choices=["quad", "mc"], default="quad")
    p.add_argument("--grid", type=positive, default=512)
    p.add_argument("--trials", type=positive, default=10 ** 6)
    p.add_argument("--steps", type=positive, default=10 ** 5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    wm = sub.add_parser("worm").add_subparsers(dest="cmd", required=True)
    p = wm.add_parser("xi")
    _geom_args(p)
    p.add_argument("--sweeps", type=positive, required=True)
    p.add_argument("--therm", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=positive, default=1)
    p.add_argument("--out", help="CSV path; metadata goes to <out>.json")

    vf = sub.add_parser("verify").add_subparsers(dest="cmd", required=True)
    p = vf.add_parser("all")
    p.add_argument("--tier", choices=["fast", "full", "mc"], default="fast")
    p.add_argument("--out")
    return ap


# commands ---------------------------------------------------------------------------

def _geom(a) -> TorusGeom:
    return TorusGeom(a.d, a.L)


def _site(geom: TorusGeom, text: str) -> int:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != geom.d:
        raise UsageError(f"site {text!r} needs {geom.d} comma-separated coordinates")
    return parse_site(geom, parts)


def cmd_dimer(a) -> int:
    from .dimer import count_covers, monomer_correlation_table
    g = _geom(a)
    if a.cmd == "count":
        rem = tuple(_site(g, r) for r in a.remove)
        c = count_covers(g, rem, a.method)
        _emit(dumps({"command": "dimer count", "d": g.d, "L": g.L,
                     "removed": [list(g.coords(s)) for s in rem], "method": a.method, "count": c}), a.out)
        return 0
    xi = monomer_correlation_table(g)
    rows = [list(g.coords(s)) + [xi[s].numerator, xi[s].denominator] for s in range(g.n)]
    _emit(_csv([f"x_{i + 1}" for i in range(g.d)] + ["xi_num", "xi_den"], rows), a.out)
    return 0


def cmd_perm(a) -> int:
    from .permutation import box_probability, partition_ell, target_law, two_point_table, partition_directed
    g = _geom(a)
    if a.cmd == "zf":
        zl = partition_ell(g, a.N, a.rho)
        zs = {",".join(map(str, g.coords(s))): partition_directed(g, a.N, a.rho, g.origin, s)
              for s in range(g.n)}
        _emit(dumps({"command": "perm zf", "d": g.d, "L": g.L, "N": a.N, "rho": a.rho,
                     "Z_loop": zl, "Z_directed_from_o": zs}), a.out)
        return 0
    if a.cmd == "g":
        t = two_point_table(g, a.N, a.rho)
        sites = [_site(g, x) for x in a.x] if a.x else range(g.n)
        rows = [list(g.coords(s)) + [t[s].numerator, t[s].denominator] for s in sites]
        _emit(_csv([f"x_{i + 1}" for i in range(g.d)] + ["g_num", "g_den"], rows), a.out)
        return 0
    law = target_law(g, a.N, a.rho)
    rows = [list(g.coords(s)) + [law[s].numerator, law[s].denominator] for s in range(g.n)]
    text = _csv([f"x_{i + 1}" for i in range(g.d)] + ["p_num", "p_den"], rows)
    _emit(text, a.out)
    box = box_probability(g, a.N, a.rho)
    sys.stderr.write(dumps({"command": "perm target-law", "box": box}))
    return 0


def _report_payload(rep) -> dict:
    return {"check": rep.check, "params": rep.params, "pass": bool(rep.passed), "witnesses": rep.witnesses,
            "details": getattr(rep, "details", {})}


def cmd_pathweb(a) -> int:
    import random
    from . import pathweb as pw
    g = _geom(a)
    ext = ExtendedTorusGeom(g)
    if a.check != "key" and (g.d != 1 or g.L not in (4, 6)):
        raise UsageError("path-model checks enumerate W1 and support d=1 with L in {4, 6}")
    if a.check in ("expansion", "chessboard", "rp") and g.L != 4:
        raise UsageError(f"--check {a.check} needs the full W1 and supports d=1, L=4 only")
    rng = random.Random(a.seed)
    if a.check == "components":
        rep = pw.verify_lemma_components(ext, a.N, a.lam)
    elif a.check == "expansion":
        reps = []
        for _ in range(a.samples):
            v = [Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(g.n)]
            reps.append(pw.polynomial_expansion_check(ext, a.N, a.lam, pw.h_from_v(g, v)))
        rep = _merge("expansion", reps)
    elif a.check == "chessboard":
        hs = np.random.default_rng(a.seed).uniform(-1, 1, (a.samples, ext.vertex_count))
        rep = _merge("chessboard", [pw.chessboard_check(ext, a.N, a.lam, h) for h in hs])
    elif a.check == "rp":
        reps = []
        for plane in all_planes(g):
            fs = [(pw.seeded_function(a.seed * 7919 + 2 * i), pw.seeded_function(a.seed * 7919 + 2 * i + 1))
                  for i in range(a.samples)]
            reps.append(pw.reflection_positivity_check(ext, a.N, a.lam, plane, fs))
        rep = _merge("rp", reps)
    else:
        from .permutation import two_point_table
        table = two_point_table(g, a.N, a.rho)
        reps = []
        for _ in range(a.samples):
            v = [rng.randint(-5, 5) for _ in range(g.n)]
            reps.append(pw.key_inequality_check(g, a.N, a.rho, v, table))
        rep = _merge("key", reps)
    rep.params.update({"d": g.d, "L": g.L, "N": a.N, "lambda": str(a.lam), "seed": a.seed})
    _emit(dumps(_report_payload(rep)), a.out)
    return 0 if rep.passed else 1


def _merge(check: str, reps):
    from .pathweb import Report
    wit = [w for r in reps for w in r.witnesses]
    return Report(check, dict(reps[0].params) if reps else {}, all(r.passed for r in reps), wit[:10],
                  {"samples": len(reps)})


def cmd_spec(a) -> int:
    from . import spectral as sp
    g = _geom(a)
    if a.cmd == "il":
        il = sp.i_l(g.d, g.L)
        payload = {"command": "spec il", "d": g.d, "L": g.L, "I_L": il}
        if g.d >= 3:
            from .rwalk import r_quadrature
            target = r_quadrature(g.d).value / (4 * g.d)
            payload.update({"r_d_over_4d": target, "gap": il - target})
        else:
            payload.update({"r_d_over_4d": None, "gap": None})
        _emit(dumps(payload), a.out)
        return 0
    if a.cmd == "upsilon":
        u = sp.upsilon_complex(g.d, g.L)
        rows = [list(g.coords(s)) + [f"{u[s].real:.17g}", f"{u[s].imag:.17g}"] for s in range(g.n)]
        _emit(_csv([f"x_{i + 1}" for i in range(g.d)] + ["re", "im"], rows), a.out)
        return 0
    if a.cmd == "dft":
        G, Go, Ge = sp.g_arrays(g, a.N, a.rho)
        f = {"G": G, "Go": Go, "Ge": Ge}[a.sector]
        _emit(sp.dft(g, f, a.sector).to_csv(), a.out)
        return 0
    if a.check != "psi" and a.N is None:
        raise UsageError(f"--check {a.check} needs --N")
    fn = {"hf": sp.high_frequency_check, "parity": sp.parity_symmetry_check,
          "modediff": sp.mode_difference_identity, "infrared": sp.infrared_check,
          "psi": sp.psi_symmetrisation_check}[a.check]
    rep = fn(g, a.N, a.rho)
    _emit(dumps(_report_payload(rep)), a.out)
    return 0 if rep.passed else 1


def cmd_rwalk(a) -> int:
    from .rwalk import r_montecarlo, r_quadrature
    try:
        est = r_quadrature(a.d, a.grid) if a.method == "quad" else r_montecarlo(a.d, a.trials, a.steps, a.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit(dumps({"command": "rwalk r", **est.as_dict(), "method": a.method}), a.out)
    return 0


def cmd_worm(a) -> int:
    from .worm import worm_run
    g = _geom(a)
    if g.d not in (2, 3):
        raise UsageError("worm sampling supports d in {2, 3}")
    res = worm_run(g, a.sweeps, a.therm, a.seed, a.chains)
    meta = dumps({"command": "worm xi", **res.metadata()})
    _emit(res.to_csv(), a.out)
    if a.out:
        _emit(meta, a.out + ".json")
    else:
        sys.stderr.write(meta)
    return 0


def cmd_verify(a) -> int:
    from .suites import run_suite

    def progress(r):
        sys.stderr.write(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.1f}s)\n")

    return report_writer(run_suite(a.tier, progress), a.tier, a.out)


def report_writer(results, tier: str, out: str | None = None) -> int:
    """Write suite results as one JSON report; exit code 0 if every check passed."""
    ok = all(r.passed for r in results)
    payload = {"command": "verify all", "tier": tier, "pass": ok,
               "checks": [{"name": r.name, "pass": r.passed, "details": r.details} for r in results]}
    _emit(dumps(payload), out)
    return 0 if ok else 1


def _threads() -> None:
    n = os.environ.get("LATTPERM_THREADS")
    if not n:
        return
    try:
        import numba
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    except (ImportError, ValueError):
        pass


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _threads()
    handlers = {"dimer": cmd_dimer, "perm": cmd_perm, "pathweb": cmd_pathweb, "spec": cmd_spec,
                "rwalk": cmd_rwalk, "worm": cmd_worm, "verify": cmd_verify}
    try:
        return handlers[a.group](a)
    except (UsageError, GeometryError) as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except Exception as exc:
        from .permutation import EnumerationCapExceeded
        if isinstance(exc, (EnumerationCapExceeded,)):
            sys.stderr.write(f"infeasible parameters: {exc}\n")
            return 2
        raise


dispatch = main


if __name__ == "__main__":
    sys.exit(main())
