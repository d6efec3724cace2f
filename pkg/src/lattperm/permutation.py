"""Lattice permutations: enumeration, exact partition functions, two-point function.

A configuration is a partial successor map on the torus. In the closed
sector every site has equal in- and out-degree in {0, 1}; with distinct
endpoints (x, y) there is in addition one self-avoiding walk from x to y.
For x = y the endpoint is a walk of one vertex: it is neither a monomer nor
part of a loop, so H + M = L^d - 1 on every two-point configuration.

Weights: rho^M (N/2)^Lc with M the monomers and Lc the loops plus double
edges; in the edge parametrization lambda^H (N/2)^Lc with H the directed edges.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .dimer import count_covers, enumerate_covers
from .looptm import LoopTransfer
from .torus import TorusGeom, require_even_L


class EnumerationCapExceeded(RuntimeError):
    pass


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        raise TypeError("use exact rationals (int, Fraction or 'p/q'), not floats")
    return Fraction(v)


@dataclass(frozen=True)
class LoopConfig:
    """succ[x] is the successor of x or -1; ends = (x, y) for a two-point configuration."""

    succ: tuple[int, ...]
    ends: tuple[int, int] | None = None

    def in_degree(self) -> list[int]:
        deg = [0] * len(self.succ)
        for t in self.succ:
            if t >= 0:
                deg[t] += 1
        return deg

    @property
    def H(self) -> int:
        return sum(1 for t in self.succ if t >= 0)

    @property
    def M(self) -> int:
        ind = self.in_degree()
        skip = self.ends[0] if self.ends and self.ends[0] == self.ends[1] else -1
        return sum(1 for x, t in enumerate(self.succ) if t < 0 and ind[x] == 0 and x != skip)

    def cycles(self) -> list[list[int]]:
        """Closed components (double edges and loops) as site lists."""
        seen = [False] * len(self.succ)
        walk = set(self.walk())
        out = []
        for s, t in enumerate(self.succ):
            if t < 0 or seen[s] or s in walk:
                continue
            cyc, x = [], s
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = self.succ[x]
            out.append(cyc)
        return out

    @property
    def loop_count(self) -> int:
        return len(self.cycles())

    def walk(self) -> list[int]:
        if not self.ends:
            return []
        x, y = self.ends
        path = [x]
        while path[-1] != y:
            path.append(self.succ[path[-1]])
        return path

    def is_valid(self, geom: TorusGeom) -> bool:
        n = geom.n
        if len(self.succ) != n:
            return False
        for x, t in enumerate(self.succ):
            if t >= 0 and not geom.is_edge(x, t):
                return False
        ind = self.in_degree()
        if any(v > 1 for v in ind):
            return False
        out = [1 if t >= 0 else 0 for t in self.succ]
        x, y = self.ends if self.ends else (-1, -1)
        for z in range(n):
            if self.ends and x != y and z == x:
                ok = out[z] == 1 and ind[z] == 0
            elif self.ends and x != y and z == y:
                ok = out[z] == 0 and ind[z] == 1
            elif self.ends and x == y and z == x:
                ok = out[z] == 0 and ind[z] == 0
            else:
                ok = out[z] == ind[z]
            if not ok:
                return False
        if self.ends and x != y:
            seen, cur = {x}, x
            while cur != y:
                cur = self.succ[cur]
                if cur < 0 or cur in seen:
                    return False
                seen.add(cur)
        for cyc in self.cycles():
            if len(cyc) == 1 or (len(cyc) == 3):
                return False
        return True


def _enumerate(geom: TorusGeom, ends: tuple[int, int] | None, cap: int | None) -> Iterator[LoopConfig]:
    """Depth-first over succ in site order; degree balance checked once a site is final."""
    require_even_L(geom.L)
    n = geom.n
    nbrs = [sorted(int(v) for v in geom.nbr[s]) for s in range(n)]
    final_at: list[list[int]] = [[] for _ in range(n)]
    for t in range(n):
        final_at[max([t] + nbrs[t])].append(t)
    x, y = ends if ends else (-1, -1)

    def balanced(z: int, o: int, i: int) -> bool:
        if ends and x != y:
            if z == x:
                return o == 1 and i == 0
            if z == y:
                return o == 0 and i == 1
        if ends and x == y and z == x:
            return o == 0 and i == 0
        return o == i

    succ = [-1] * n
    indeg = [0] * n
    count = [0]

    def rec(s: int):
        if s == n:
            count[0] += 1
            if cap is not None and count[0] > cap:
                raise EnumerationCapExceeded(f"more than {cap} configurations")
            yield LoopConfig(tuple(succ), ends)
            return
        opts = [-1] + nbrs[s]
        for t in opts:
            if t >= 0:
                if indeg[t]:
                    continue
                succ[s] = t
                indeg[t] = 1
            ok = all(balanced(z, 1 if succ[z] >= 0 else 0, indeg[z]) for z in final_at[s])
            if ok:
                yield from rec(s + 1)
            if t >= 0:
                succ[s] = -1
                indeg[t] = 0

    yield from rec(0)


def enumerate_omega_ell(geom: TorusGeom, cap: int | None = 10 ** 7) -> Iterator[LoopConfig]:
    return _enumerate(geom, None, cap)


def enumerate_omega_xy(geom: TorusGeom, x: int, y: int, cap: int | None = 10 ** 7) -> Iterator[LoopConfig]:
    return _enumerate(geom, (x, y), cap)


@lru_cache(maxsize=None)
def _stats(d: int, L: int, ends: tuple[int, int] | None) -> dict:
    """Multiplicities of (M, loops, H) over the enumerated configurations."""
    geom = TorusGeom(d, L)
    c = Counter()
    for cfg in _enumerate(geom, ends, None):
        c[(cfg.M, cfg.loop_count, cfg.H)] += 1
    return dict(c)


def _sum_rho(stats: dict, N: int, rho: Fraction) -> Fraction:
    half = Fraction(N, 2)
    return sum((rho ** M * half ** k * mult for (M, k, _), mult in stats.items()), Fraction(0))


def _sum_lambda(stats: dict, N: int, lam: Fraction) -> Fraction:
    half = Fraction(N, 2)
    return sum((lam ** H * half ** k * mult for (_, k, H), mult in stats.items()), Fraction(0))


def _auto_method(geom: TorusGeom) -> str:
    if geom.d == 1 and geom.L <= 8:
        return "enumerate"
    if geom.d in (1, 2):
        return "transfer"
    if geom.n <= 16:
        return "enumerate"
    raise ValueError(f"no exact method for d={geom.d}, L={geom.L}")


@lru_cache(maxsize=None)
def _transfer_table(d: int, L: int, N: int, mono: Fraction, t: Fraction):
    geom = TorusGeom(d, L)
    return LoopTransfer(geom, N, mono, t).compute()


def partition_ell(geom: TorusGeom, N: int, rho, method: str = "auto") -> Fraction:
    """Z^l = sum over the closed sector of rho^M (N/2)^loops."""
    rho = as_fraction(rho)
    method = _auto_method(geom) if method == "auto" else method
    if method == "enumerate":
        return _sum_rho(_stats(geom.d, geom.L, None), N, rho)
    return _transfer_table(geom.d, geom.L, int(N), rho, Fraction(1))[0]


def partition_directed(geom: TorusGeom, N: int, rho, x: int, y: int, method: str = "auto") -> Fraction:
    """Z(x, y) = sum over configurations with a walk from x to y of rho^M (N/2)^loops."""
    rho = as_fraction(rho)
    method = _auto_method(geom) if method == "auto" else method
    if method == "enumerate":
        return _sum_rho(_stats(geom.d, geom.L, (x, y)), N, rho)
    z = geom.diff_table[x, y]
    return _transfer_table(geom.d, geom.L, int(N), rho, Fraction(1))[1][int(z)]


def two_point(geom: TorusGeom, N: int, rho, x: int, y: int, method: str = "auto") -> Fraction:
    zl = partition_ell(geom, N, rho, method)
    if zl == 0:
        raise ZeroDivisionError("closed-sector partition function vanishes")
    return partition_directed(geom, N, rho, x, y, method) / zl


def two_point_table(geom: TorusGeom, N: int, rho, method: str = "auto") -> dict[int, Fraction]:
    """y -> G(o, y) for every site y."""
    rho = as_fraction(rho)
    method = _auto_method(geom) if method == "auto" else method
    o = geom.origin
    if method == "enumerate":
        zl = partition_ell(geom, N, rho, method)
        return {y: partition_directed(geom, N, rho, o, y, method) / zl for y in range(geom.n)}
    zl, zs = _transfer_table(geom.d, geom.L, int(N), rho, Fraction(1))
    return {y: zs[y] / zl for y in range(geom.n)}


@dataclass
class LambdaReport:
    value: Fraction
    rho_side: Fraction
    holds: bool


def partition_lambda(geom: TorusGeom, N: int, lam, xy: tuple[int, int] | None = None,
                     method: str = "auto") -> LambdaReport:
    """Y in the edge parametrization, checked against lambda^(L^d or L^d - 1) Z_{1/lambda}."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    method = _auto_method(geom) if method == "auto" else method
    n = geom.n
    if method == "enumerate":
        ends = None if xy is None else tuple(xy)
        val = _sum_lambda(_stats(geom.d, geom.L, ends), N, lam)
    else:
        zl, zs = _transfer_table(geom.d, geom.L, int(N), Fraction(1), lam)
        val = zl if xy is None else zs[int(geom.diff_table[xy[0], xy[1]])]
    if xy is None:
        other = lam ** n * partition_ell(geom, N, 1 / lam, method)
    else:
        other = lam ** (n - 1) * partition_directed(geom, N, 1 / lam, xy[0], xy[1], method)
    return LambdaReport(val, other, val == other)


def lambda_two_point_relation(geom: TorusGeom, N: int, lam, x: int, y: int, method: str = "auto") -> bool:
    """G_{1/lambda}(x, y) == lambda Y(x, y) / Y^l, exactly."""
    lam = as_fraction(lam)
    yl = partition_lambda(geom, N, lam, None, method).value
    yxy = partition_lambda(geom, N, lam, (x, y), method).value
    return two_point(geom, N, 1 / lam, x, y, method) == lam * yxy / yl


def target_law(geom: TorusGeom, N: int, rho, method: str = "auto") -> dict[int, Fraction]:
    """P(X = x) = G(o, x) / sum_z G(o, z)."""
    g = two_point_table(geom, N, rho, method)
    tot = sum(g.values(), Fraction(0))
    if tot == 0:
        raise ZeroDivisionError("two-point configurations have zero total weight")
    return {x: v / tot for x, v in g.items()}


def box_probability(geom: TorusGeom, N: int, rho, method: str = "auto") -> dict:
    """P(X in A) for A = {|x|_inf <= 1}, reported next to |A| / L^d."""
    law = target_law(geom, N, rho, method)
    box = [x for x in range(geom.n) if max(abs(int(c)) for c in geom.coord_array[x]) <= 1]
    return {"p_box": sum((law[x] for x in box), Fraction(0)), "volume_fraction": Fraction(len(box), geom.n)}


# dimer pairs and fully packed configurations --------------------------------

def pair_to_loops(geom: TorusGeom, red: tuple[int, ...], blue: tuple[int, ...]) -> LoopConfig:
    """Superpose two covers; each alternating cycle is oriented so that its
    lowest-index site leaves along its red dimer."""
    n = geom.n
    succ = [-1] * n
    done = [False] * n
    for s in range(n):
        if done[s]:
            continue
        if red[s] == blue[s]:
            succ[s], succ[red[s]] = red[s], s
            done[s] = done[red[s]] = True
            continue
        x, use_red = s, True
        while not done[x]:
            done[x] = True
            nxt = red[x] if use_red else blue[x]
            succ[x] = nxt
            x, use_red = nxt, not use_red
    return LoopConfig(tuple(succ))


def loops_to_pair(cfg: LoopConfig) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = len(cfg.succ)
    red, blue = [-1] * n, [-1] * n
    for cyc in cfg.cycles():
        if len(cyc) == 2:
            a, b = cyc
            red[a], red[b], blue[a], blue[b] = b, a, b, a
            continue
        s = min(cyc)
        k = cyc.index(s)
        order = cyc[k:] + cyc[:k]
        for i, x in enumerate(order):
            nxt = order[(i + 1) % len(order)]
            tgt = red if i % 2 == 0 else blue
            tgt[x], tgt[nxt] = nxt, x
    return tuple(red), tuple(blue)


@dataclass
class BijectionReport:
    covers: int
    pairs: int
    packed: int
    injective: bool
    round_trip: bool
    ok: bool
    witness: object = None


def bijection_check_dimers(geom: TorusGeom) -> BijectionReport:
    """Pairs of covers <-> fully packed closed configurations."""
    covers = [c.partner for c in enumerate_covers(geom)]
    images = set()
    witness = None
    round_trip = True
    for r in covers:
        for b in covers:
            cfg = pair_to_loops(geom, r, b)
            images.add(cfg.succ)
            if round_trip and loops_to_pair(cfg) != (r, b):
                round_trip = False
                witness = (r, b)
    packed = [cfg for cfg in enumerate_omega_ell(geom, cap=None) if cfg.M == 0]
    packed_set = {c.succ for c in packed}
    pairs = len(covers) ** 2
    injective = len(images) == pairs
    ok = injective and round_trip and images == packed_set and pairs == count_covers(geom) ** 2
    if not ok and witness is None:
        diff = images ^ packed_set
        witness = next(iter(diff)) if diff else None
    return BijectionReport(len(covers), pairs, len(packed_set), injective, round_trip, ok, witness)


@dataclass
class MonotonicityReport:
    axis_values: dict
    chain_ok: bool
    bound_ok: bool
    axes_equal: bool
    ok: bool


def monotonicity_check(geom: TorusGeom, N: int, method: str = "auto") -> MonotonicityReport:
    """At rho = 0: G(o, n e_i) nonincreasing over odd n < L/2, and G(o, z) <= 1/(dN) at odd z."""
    g = two_point_table(geom, N, 0, method)
    bound = Fraction(1, geom.d * N)
    axis_values = {}
    chain_ok = True
    for i in range(1, geom.d + 1):
        vals = [g[geom.unit(i, k)] for k in range(1, geom.L // 2, 2)]
        axis_values[i] = vals
        chain_ok &= all(a >= b for a, b in zip(vals, vals[1:]))
    bound_ok = all(g[z] <= bound for z in geom.odd_sites)
    axes_equal = len({tuple(v) for v in axis_values.values()}) == 1
    return MonotonicityReport(axis_values, chain_ok, bound_ok, axes_equal, chain_ok and bound_ok and axes_equal)
