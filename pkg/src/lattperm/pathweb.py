"""Random-path model on the extended torus with the weight function H.

A configuration w = (m, c, gamma): link counts per edge, a colour per link
and, per vertex, a pairing of link ends. Under H every original vertex has
at most one pairing and at most two unpaired link ends, with at most one
unpaired end on its vertical edge (weight 1/2 when there is one); virtual
vertices carry no pairing. The support W1 is finite.

Skeletons (m, gamma) are enumerated explicitly; colourings constant along
each path contribute N^(number of paths). Aggregated sums are stored as
polynomials in lambda and N so one enumeration serves every parameter point.
"""

from __future__ import annotations

import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Iterable, Iterator

import numpy as np

from .permutation import as_fraction, partition_lambda
from .torus import ExtendedTorusGeom, ReflectionPlane, TorusGeom, all_planes, require_even_L

LinkEnd = tuple[int, int]  # (edge id, label 1..m_e)


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class PathWeb:
    """m[e] links per edge; pairs[v] is None or the pair of link ends paired at v;
    colours[e] is a tuple of colours (1..N) per link, or None for a skeleton."""

    m: tuple[int, ...]
    pairs: tuple
    colours: tuple | None = None

    def link_ends(self, ext: ExtendedTorusGeom, v: int) -> list[LinkEnd]:
        return [(e, p) for e in ext.incident[v] for p in range(1, self.m[e] + 1)]

    def n(self, v: int) -> int:
        return 0 if self.pairs[v] is None else 1

    def u(self, ext: ExtendedTorusGeom, v: int) -> int:
        deg = sum(self.m[e] for e in ext.incident[v])
        return deg - 2 * self.n(v)


def h_weight(ext: ExtendedTorusGeom, w: PathWeb, v: int) -> Fraction:
    """H_v(w) from the local data at v."""
    if ext.is_virtual(v):
        return Fraction(1) if w.pairs[v] is None else Fraction(0)
    ends = w.link_ends(ext, v)
    paired = set(w.pairs[v]) if w.pairs[v] is not None else set()
    u = len(ends) - len(paired)
    if u > 2:
        return Fraction(0)
    vert = ext.edge_id[(v, ext.virtual(v))]
    loose_vertical = sum(1 for e, p in ends if e == vert and (e, p) not in paired)
    if loose_vertical == 0:
        return Fraction(1)
    if loose_vertical == 1:
        return Fraction(1, 2)
    return Fraction(0)


def _local_options(ext: ExtendedTorusGeom, v: int, m: tuple[int, ...]):
    """(pair or None, H weight, u) for every admissible local pairing at v."""
    ends = [(e, p) for e in ext.incident[v] for p in range(1, m[e] + 1)]
    if ext.is_virtual(v):
        return [(None, Fraction(1), len(ends))]
    vert = ext.edge_id[(v, ext.virtual(v))]
    out = []
    choices = [None] + list(combinations(ends, 2))
    for pair in choices:
        paired = set(pair) if pair else set()
        u = len(ends) - len(paired)
        if u > 2:
            continue
        loose = sum(1 for e, p in ends if e == vert and (e, p) not in paired)
        if loose > 1:
            continue
        out.append((pair, Fraction(1, 2) if loose else Fraction(1), u))
    return out


def _link_bounds(ext: ExtendedTorusGeom) -> list[int]:
    return [3 if ext.is_vertical(e) else 4 for e in range(len(ext.edges))]


def _m_vectors(ext: ExtendedTorusGeom, max_loose: int | None = None) -> Iterator[tuple[int, ...]]:
    """Link-count vectors with total degree <= 4 at every original vertex.

    With `max_loose`, vectors that force more unpaired ends than that are pruned:
    an original vertex of degree k leaves at least k - 2 ends unpaired, a virtual
    vertex leaves all of them.
    """
    E = len(ext.edges)
    bounds = _link_bounds(ext)
    n = ext.n
    deg = [0] * ext.vertex_count
    m = [0] * E
    cap = math.inf if max_loose is None else max_loose

    def forced(v: int, k: int) -> int:
        return k if v >= n else max(k - 2, 0)

    def rec(k: int, lb: int):
        if k == E:
            yield tuple(m)
            return
        a, b = ext.edges[k]
        for c in range(bounds[k] + 1):
            if (a < n and deg[a] + c > 4) or (b < n and deg[b] + c > 4):
                break
            nlb = lb + forced(a, deg[a] + c) - forced(a, deg[a]) + forced(b, deg[b] + c) - forced(b, deg[b])
            if nlb > cap:
                break
            m[k] = c
            deg[a] += c
            deg[b] += c
            yield from rec(k + 1, nlb)
            deg[a] -= c
            deg[b] -= c
        m[k] = 0

    yield from rec(0, 0)


class _DSU:
    def __init__(self, n: int):
        self.p = list(range(n))

    def find(self, a: int) -> int:
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


@dataclass(frozen=True)
class PathClass:
    kind: str  # "loop", "double", "walk", "segment"
    links: tuple[LinkEnd, ...]
    extremal: tuple = ()  # walks: ((x, q), (y, r)) directed edges, paired end -> loose end


def classify_paths(ext: ExtendedTorusGeom, w: PathWeb) -> list[PathClass]:
    """Split the links of w into maximal pairing-connected sets."""
    links = [(e, p) for e in range(len(w.m)) for p in range(1, w.m[e] + 1)]
    idx = {l: i for i, l in enumerate(links)}
    dsu = _DSU(len(links))
    paired_at: dict = {}
    for v, pair in enumerate(w.pairs):
        if pair is None:
            continue
        a, b = pair
        dsu.union(idx[a], idx[b])
        paired_at[(a, v)] = True
        paired_at[(b, v)] = True
    comps: dict = defaultdict(list)
    for l in links:
        comps[dsu.find(idx[l])].append(l)
    out = []
    for comp in comps.values():
        loose = []
        for (e, p) in comp:
            a, b = ext.edges[e]
            for end, other in ((a, b), (b, a)):
                if not paired_at.get(((e, p), end)):
                    loose.append(((e, p), other, end))
        if len(comp) == 1 and len(loose) == 2:
            out.append(PathClass("segment", tuple(comp)))
        elif not loose:
            out.append(PathClass("double" if len(comp) == 2 else "loop", tuple(sorted(comp))))
        else:
            ext_links = tuple(sorted((paired_end, loose_end) for _, paired_end, loose_end in loose))
            out.append(PathClass("walk", tuple(sorted(comp)), ext_links))
    out.sort(key=lambda c: (c.kind, c.links))
    return out


def _skeleton_iter(ext: ExtendedTorusGeom, budget: int | None,
                   max_loose: int | None = None) -> Iterator[tuple[PathWeb, Fraction]]:
    """(skeleton, prod_e 1/m_e! * prod_v H_v) for every skeleton of W1
    (only those with at most `max_loose` unpaired ends when given)."""
    count = 0
    V = ext.vertex_count
    cap = math.inf if max_loose is None else max_loose
    for m in _m_vectors(ext, max_loose):
        opts = [_local_options(ext, v, m) for v in range(V)]
        if max_loose is not None:
            opts = [[o for o in ov if o[2] <= cap] for ov in opts]
        if any(not o for o in opts):
            continue
        base = Fraction(1, math.prod(math.factorial(c) for c in m))
        for combo in product(*opts):
            if max_loose is not None and sum(o[2] for o in combo) > cap:
                continue
            count += 1
            if budget is not None and count > budget:
                raise BudgetExceeded(f"W1 has more than {budget} skeletons")
            hw = base
            for _, wv, _ in combo:
                hw *= wv
            yield PathWeb(m, tuple(c[0] for c in combo)), hw


def enumerate_W1(ext: ExtendedTorusGeom, N: int, colours: bool = True,
                 budget: int | None = 5 * 10 ** 6) -> Iterator[PathWeb]:
    """Every configuration of W1 once; colourings expanded when `colours`."""
    require_even_L(ext.base.L)
    for sk, _ in _skeleton_iter(ext, budget):
        if not colours:
            yield sk
            continue
        paths = classify_paths(ext, sk)
        for cols in product(range(1, N + 1), repeat=len(paths)):
            cmap = {}
            for pc, c in zip(paths, cols):
                for l in pc.links:
                    cmap[l] = c
            col = tuple(tuple(cmap[(e, p)] for p in range(1, sk.m[e] + 1)) for e in range(len(sk.m)))
            yield PathWeb(sk.m, sk.pairs, col)


def mu_weight(ext: ExtendedTorusGeom, w: PathWeb, N: int, lam) -> Fraction:
    """Product over edges of lam^m/m! times product over vertices of H (one colouring)."""
    lam = as_fraction(lam)
    if w.colours is not None:
        for v, pair in enumerate(w.pairs):
            if pair is not None:
                (e1, p1), (e2, p2) = pair
                if w.colours[e1][p1 - 1] != w.colours[e2][p2 - 1]:
                    return Fraction(0)
    out = Fraction(1)
    for c in w.m:
        out *= lam ** c / math.factorial(c)
    for v in range(ext.vertex_count):
        out *= h_weight(ext, w, v)
        if not out:
            return out
    return out


# aggregated tables -------------------------------------------------------------

@dataclass
class W1Tables:
    """Sums over W1 keyed by (lambda exponent, number of paths) -> rational.

    zh: u-vector -> {(lam_exp, paths): coeff} for the central quantity;
    closed, segment[e], walk[(a, b)] for the path-class subsets.
    """

    ext: ExtendedTorusGeom
    size: int
    zh: dict
    closed: dict
    segment: dict
    walk: dict


def _add(table: dict, key, val: Fraction) -> None:
    table[key] = table.get(key, 0) + val


@lru_cache(maxsize=None)
def w1_tables(d: int, L: int, max_loose: int | None = None) -> W1Tables:
    """Aggregate W1 (or its part with at most `max_loose` unpaired ends)."""
    ext = ExtendedTorusGeom(TorusGeom(d, L))
    zh: dict = defaultdict(dict)
    closed: dict = {}
    segment: dict = defaultdict(dict)
    walk: dict = defaultdict(dict)
    size = 0
    V = ext.vertex_count
    for sk, hw in _skeleton_iter(ext, None, max_loose):
        size += 1
        lam_exp = sum(sk.m)
        paths = classify_paths(ext, sk)
        key = (lam_exp, len(paths))
        u = tuple(sk.u(ext, v) for v in range(V))
        _add(zh[u], key, hw)
        kinds = [p.kind for p in paths]
        nseg, nwalk = kinds.count("segment"), kinds.count("walk")
        if nseg == 0 and nwalk == 0:
            _add(closed, key, hw)
        elif nseg == 1 and nwalk == 0:
            seg = next(p for p in paths if p.kind == "segment")
            _add(segment[seg.links[0][0]], key, hw)
        elif nwalk == 1 and nseg == 0:
            wk = next(p for p in paths if p.kind == "walk")
            _add(walk[tuple(sorted(wk.extremal))], key, hw)
    return W1Tables(ext, size, dict(zh), closed, dict(segment), dict(walk))


def _eval(poly: dict, N: int, lam: Fraction) -> Fraction:
    return sum((c * lam ** a * N ** k for (a, k), c in poly.items()), Fraction(0))


# central quantity -------------------------------------------------------------

@dataclass
class CentralPolynomial:
    """Z(h) = sum over u-vectors of coeff * prod_v h_v^u_v at fixed (N, lambda)."""

    ext: ExtendedTorusGeom
    exps: np.ndarray
    coeffs: list[Fraction]

    def exact(self, h: Iterable) -> Fraction:
        h = [as_fraction(x) for x in h]
        tot = Fraction(0)
        for row, c in zip(self.exps, self.coeffs):
            term = c
            for v in np.flatnonzero(row):
                term *= h[v] ** int(row[v])
            tot += term
        return tot

    def value(self, h: np.ndarray) -> float:
        h = np.asarray(h, dtype=float)
        cf = np.array([float(c) for c in self.coeffs])
        return float((cf * np.prod(h[None, :] ** self.exps, axis=1)).sum())

    def phi_coefficients(self, h: Iterable) -> dict[int, Fraction]:
        """Coefficients of Z(phi h) as a polynomial in phi, exact."""
        h = [as_fraction(x) for x in h]
        out: dict[int, Fraction] = defaultdict(Fraction)
        for row, c in zip(self.exps, self.coeffs):
            term = c
            for v in np.flatnonzero(row):
                term *= h[v] ** int(row[v])
            out[int(row.sum())] += term
        return dict(out)


@lru_cache(maxsize=None)
def central_polynomial(d: int, L: int, N: int, lam: Fraction) -> CentralPolynomial:
    t = w1_tables(d, L)
    keys = sorted(t.zh)
    exps = np.array(keys, dtype=np.int64)
    coeffs = [_eval(t.zh[k], N, lam) for k in keys]
    return CentralPolynomial(t.ext, exps, coeffs)


def central_quantity(ext: ExtendedTorusGeom, N: int, lam, h) -> Fraction | float:
    """Z(h): exact for rational h, float otherwise."""
    poly = central_polynomial(ext.base.d, ext.base.L, int(N), as_fraction(lam))
    h = list(h)
    if all(isinstance(x, (int, Fraction, str)) for x in h):
        return poly.exact(h)
    return poly.value(np.asarray(h, dtype=float))


def h_from_v(geom: TorusGeom, v: Iterable) -> list:
    """h_x = v_x at originals and -2d v_x at the virtual vertex above x."""
    v = list(v)
    return v + [-2 * geom.d * x for x in v]


# identity checks ------------------------------------------------------------------

@dataclass
class Report:
    check: str
    params: dict
    passed: bool
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def _y_tables(geom: TorusGeom, N: int, lam: Fraction):
    yl = partition_lambda(geom, N, lam).value
    o = geom.origin
    yxy = {z: partition_lambda(geom, N, lam, (o, z)).value for z in range(geom.n)}
    return yl, lambda x, y: yxy[int(geom.diff_table[x, y])]


def verify_lemma_components(ext: ExtendedTorusGeom, N: int, lam) -> Report:
    """Closed, one-segment and one-walk subsets of W1 against Y^l and Y(x, y)."""
    lam = as_fraction(lam)
    geom = ext.base
    t = w1_tables(geom.d, geom.L, 2)
    yl, yxy = _y_tables(geom, N, lam)
    wit = []
    got = _eval(t.closed, N, lam)
    if got != yl:
        wit.append({"set": "closed", "got": str(got), "want": str(yl)})
    for e, (a, b) in enumerate(ext.edges):
        want = lam * N * yl if not ext.is_vertical(e) else lam / 2 * N * yl
        got = _eval(t.segment.get(e, {}), N, lam)
        if got != want:
            wit.append({"set": "segment", "edge": [a, b], "got": str(got), "want": str(want)})
    directed = []
    for a, b in ext.edges:
        directed += [(a, b), (b, a)]
    checked = 0
    for i, (x, q) in enumerate(directed):
        for (y, r) in directed[i:]:
            key = tuple(sorted([(x, q), (y, r)]))
            got = _eval(t.walk.get(key, {}), N, lam)
            if ext.is_virtual(x) or ext.is_virtual(y):
                want = Fraction(0)
            elif (x, q) == (y, r):
                want = lam * lam / 2 * N * yxy(x, x)
            else:
                want = lam * lam * N * yxy(x, y)
            checked += 1
            if got != want:
                wit.append({"set": "walk", "edges": [[x, q], [y, r]], "got": str(got), "want": str(want)})
    return Report("components", {"d": geom.d, "L": geom.L, "N": N, "lambda": str(lam)},
                  not wit, wit[:10], {"walk_pairs": checked, "W1_skeletons": t.size})


def second_order_term(ext: ExtendedTorusGeom, N: int, lam, h) -> Fraction:
    """Second-order coefficient predicted from Y^l and Y(x, y)."""
    lam = as_fraction(lam)
    h = [as_fraction(x) for x in h]
    geom = ext.base
    yl, yxy = _y_tables(geom, N, lam)
    s1 = sum((h[a] * h[b] for a, b in geom.edges), Fraction(0))
    s1 += Fraction(1, 2) * sum((h[x] * h[ext.virtual(x)] for x in range(geom.n)), Fraction(0))
    nb = [sum((h[q] for q in ext.neighbors(x)), Fraction(0)) for x in range(geom.n)]
    s2 = sum((yxy(x, y) * nb[x] * nb[y] for x in range(geom.n) for y in range(geom.n)), Fraction(0))
    return N * lam * yl * s1 + N * lam * lam / 2 * s2


def polynomial_expansion_check(ext: ExtendedTorusGeom, N: int, lam, h) -> Report:
    lam = as_fraction(lam)
    geom = ext.base
    poly = central_polynomial(geom.d, geom.L, int(N), lam)
    coef = poly.phi_coefficients(h)
    yl = partition_lambda(geom, N, lam).value
    c2 = second_order_term(ext, N, lam, h)
    odd = {k: v for k, v in coef.items() if k % 2 and v != 0}
    wit = []
    if coef.get(0, 0) != yl:
        wit.append({"order": 0, "got": str(coef.get(0, 0)), "want": str(yl)})
    if coef.get(1, 0) != 0:
        wit.append({"order": 1, "got": str(coef.get(1, 0)), "want": "0"})
    if coef.get(2, 0) != c2:
        wit.append({"order": 2, "got": str(coef.get(2, 0)), "want": str(c2)})
    return Report("expansion", {"d": geom.d, "L": geom.L, "N": N, "lambda": str(lam)}, not wit, wit,
                  {"odd_nonzero": sorted(odd), "c2": str(c2)})


def copy_h(ext: ExtendedTorusGeom, h, x: int) -> list:
    n = ext.n
    return [h[x]] * n + [h[ext.virtual(x)]] * n


def chessboard_check(ext: ExtendedTorusGeom, N: int, lam, h, tol: float = 1e-12) -> Report:
    """Z(h) <= (prod_x Z(h^x))^(1/L^d), compared in the log domain."""
    geom = ext.base
    h = np.asarray(h, dtype=float)
    if np.any(np.abs(h) > 1):
        raise ValueError("entries of h must satisfy |h| <= 1")
    poly = central_polynomial(geom.d, geom.L, int(N), as_fraction(lam))
    lhs = poly.value(h)
    rhs_terms = [poly.value(np.asarray(copy_h(ext, h, x))) for x in range(geom.n)]
    details = {"lhs": lhs, "min_copy": min(rhs_terms)}
    if min(rhs_terms) < 0:
        return Report("chessboard", {"N": N, "lambda": str(lam)}, False,
                      [{"negative_copy": min(rhs_terms)}], details)
    if lhs <= 0:
        return Report("chessboard", {"N": N, "lambda": str(lam)}, True, [], details)
    log_l = math.log(lhs)
    log_r = sum(math.log(v) for v in rhs_terms) / geom.n if min(rhs_terms) > 0 else -math.inf
    details.update({"log_lhs": log_l, "log_rhs": log_r, "margin": log_r - log_l})
    ok = log_l <= log_r + tol
    return Report("chessboard", {"N": N, "lambda": str(lam)}, ok,
                  [] if ok else [{"log_lhs": log_l, "log_rhs": log_r}], details)


# reflections ----------------------------------------------------------------------

def _edge_map(ext: ExtendedTorusGeom, plane: ReflectionPlane) -> list[int]:
    return [ext.edge_id[(plane.reflect_ext(a), plane.reflect_ext(b))] for a, b in ext.edges]


def reflect_web(ext: ExtendedTorusGeom, plane: ReflectionPlane, w: PathWeb, emap: list[int] | None = None) -> PathWeb:
    emap = emap or _edge_map(ext, plane)
    E = len(w.m)
    m = [0] * E
    for e in range(E):
        m[emap[e]] = w.m[e]
    pairs = [None] * ext.vertex_count
    for v, pair in enumerate(w.pairs):
        if pair is not None:
            (e1, p1), (e2, p2) = pair
            pairs[plane.reflect_ext(v)] = tuple(sorted(((emap[e1], p1), (emap[e2], p2))))
    cols = None
    if w.colours is not None:
        cl = [()] * E
        for e in range(E):
            cl[emap[e]] = w.colours[e]
        cols = tuple(cl)
    return PathWeb(tuple(m), tuple(pairs), cols)


def restriction_key(ext: ExtendedTorusGeom, w: PathWeb, verts: set[int]) -> tuple:
    """Canonical encoding of the restriction of w to a vertex set."""
    edges = [e for e, (a, b) in enumerate(ext.edges) if a in verts or b in verts]
    ms = tuple(w.m[e] for e in edges)
    cs = tuple(w.colours[e] for e in edges) if w.colours is not None else ()
    gs = tuple(tuple(sorted(w.pairs[v])) if w.pairs[v] is not None else None for v in sorted(verts))
    return ms, cs, gs


def seeded_function(seed: int, values=(-1, 1)) -> Callable[[tuple], int]:
    """A deterministic pseudo-random table over restriction keys."""
    def f(key: tuple) -> int:
        digest = hashlib.blake2b(repr((seed, key)).encode(), digest_size=8).digest()
        return values[int.from_bytes(digest, "little") % len(values)]
    return f


@lru_cache(maxsize=None)
def _weighted_configs(d: int, L: int, N: int, lam: Fraction):
    """Every coloured configuration of W1 with its weight mu."""
    ext = ExtendedTorusGeom(TorusGeom(d, L))
    out = []
    for sk, hw in _skeleton_iter(ext, None):
        mu = hw * lam ** sum(sk.m)
        paths = classify_paths(ext, sk)
        for cols in product(range(1, N + 1), repeat=len(paths)):
            cmap = {}
            for pc, c in zip(paths, cols):
                for l in pc.links:
                    cmap[l] = c
            col = tuple(tuple(cmap[(e, p)] for p in range(1, sk.m[e] + 1)) for e in range(len(sk.m)))
            out.append((PathWeb(sk.m, sk.pairs, col), mu))
    return ext, out


@dataclass
class RPKernel:
    """mu grouped by (restriction of w, restriction of Theta w) to the + half.

    mu(f Theta g) = sum_{a,b} K[a,b] f(a) g(b) / scale, K integer.
    """

    keys: list
    rows: np.ndarray
    cols: np.ndarray
    vals: list[int]
    scale: int

    def pair(self, fa: list[int], gb: list[int]) -> Fraction:
        tot = 0
        for r, c, v in zip(self.rows, self.cols, self.vals):
            tot += v * fa[r] * gb[c]
        return Fraction(tot, self.scale)


@lru_cache(maxsize=None)
def rp_kernel(d: int, L: int, N: int, lam: Fraction, axis: int, u: Fraction) -> RPKernel:
    ext, configs = _weighted_configs(d, L, N, lam)
    plane = ReflectionPlane(ext.base, axis, u)
    plus = set(plane.plus_vertices())
    emap = _edge_map(ext, plane)
    index: dict = {}
    acc: dict = defaultdict(Fraction)
    for w, mu in configs:
        ka = restriction_key(ext, w, plus)
        kb = restriction_key(ext, reflect_web(ext, plane, w, emap), plus)
        ia = index.setdefault(ka, len(index))
        ib = index.setdefault(kb, len(index))
        acc[(ia, ib)] += mu
    scale = math.lcm(*(v.denominator for v in acc.values()))
    items = sorted(acc.items())
    keys = [None] * len(index)
    for k, i in index.items():
        keys[i] = k
    return RPKernel(keys, np.array([k[0] for k, _ in items]), np.array([k[1] for k, _ in items]),
                    [int(v * scale) for _, v in items], scale)


def reflection_positivity_check(ext: ExtendedTorusGeom, N: int, lam, plane: ReflectionPlane,
                                functions: list[tuple[Callable, Callable]]) -> Report:
    """mu(f Theta g) = mu(g Theta f), mu(f Theta f) >= 0 and the Cauchy-Schwarz bound, exactly.

    f and g act on restriction keys of the + half (see `restriction_key`).
    """
    geom = ext.base
    ker = rp_kernel(geom.d, geom.L, int(N), as_fraction(lam), plane.axis, plane.u)
    wit = []
    for i, (f, g) in enumerate(functions):
        fa = [f(k) for k in ker.keys]
        ga = [g(k) for k in ker.keys]
        fg, gf = ker.pair(fa, ga), ker.pair(ga, fa)
        ff, gg = ker.pair(fa, fa), ker.pair(ga, ga)
        ok = fg == gf and ff >= 0 and gg >= 0 and fg * fg <= ff * gg
        if not ok:
            wit.append({"pair": i, "fThetag": str(fg), "gThetaf": str(gf), "fThetaf": str(ff), "gThetag": str(gg)})
    return Report("rp", {"d": geom.d, "L": geom.L, "N": N, "lambda": str(as_fraction(lam)), "axis": plane.axis,
                         "u": str(plane.u)}, not wit, wit,
                  {"pairs": len(functions), "restrictions": len(ker.keys), "kernel_entries": len(ker.vals)})


def theta_invariance_check(ext: ExtendedTorusGeom, N: int, lam) -> bool:
    """mu(w) = mu(Theta w) and Theta w in W1 for every w and every plane."""
    geom = ext.base
    _, configs = _weighted_configs(geom.d, geom.L, int(N), as_fraction(lam))
    for plane in all_planes(geom):
        emap = _edge_map(ext, plane)
        for w, mu in configs:
            if mu_weight(ext, reflect_web(ext, plane, w, emap), N, lam) != mu:
                return False
    return True


# key inequality -----------------------------------------------------------------

def laplacian(geom: TorusGeom, v) -> list:
    """(Delta v)_x = sum over neighbours y of (v_y - v_x)."""
    return [sum((v[int(y)] - v[x] for y in geom.nbr[x]), 0 * v[x]) for x in range(geom.n)]


def key_inequality_check(geom: TorusGeom, N: int, rho, v, g_table: dict | None = None) -> Report:
    """sum_{x,y} G(x,y) (Dv)_x (Dv)_y <= sum over edges (v_y - v_x)^2."""
    from .permutation import two_point_table
    rho = as_fraction(rho)
    g = g_table if g_table is not None else two_point_table(geom, N, rho)
    exact = all(isinstance(x, (int, Fraction)) for x in v)
    vv = [Fraction(x) for x in v] if exact else [float(x) for x in v]
    lap = laplacian(geom, vv)
    n = geom.n
    diff = geom.diff_table
    if exact:
        lhs = Fraction(0)
        for x in range(n):
            if lap[x] == 0:
                continue
            row = Fraction(0)
            for y in range(n):
                if lap[y]:
                    row += g[int(diff[x, y])] * lap[y]
            lhs += lap[x] * row
    else:
        G = np.array([[float(g[int(diff[x, y])]) for y in range(n)] for x in range(n)])
        la = np.array(lap, dtype=float)
        lhs = float(la @ G @ la)
    rhs = sum(((vv[b] - vv[a]) ** 2 for a, b in geom.edges), 0 * vv[0])
    ok = lhs <= rhs
    return Report("key", {"d": geom.d, "L": geom.L, "N": N, "rho": str(rho)}, ok,
                  [] if ok else [{"lhs": str(lhs), "rhs": str(rhs)}], {"lhs": str(lhs), "rhs": str(rhs)})
