"""Exact lattice-permutation partition functions by a layer transfer matrix.

Each edge carries a status: empty, double edge, or a loop strand of some
colour. N = a + 2b with a = N mod 2 undirected colours and b directed colours
(two orientations each), so every closed loop picks up N choices and every
double edge the factor N/2. The open walk uses one fixed colour and
orientation, so it carries no colour factor.

Layer matrices are assembled site by site with integer weights (each site's
local weight scaled by a common denominator) and multiplied block by block,
modulo a few primes and once in floating point. The exact rational is rebuilt
by the Chinese remainder theorem; the float pass bounds its size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm

import numpy as np

from .torus import TorusGeom, require_even_L

GENERIC, SOURCE, SINK, POINT = 0, 1, 2, 3


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _primes_below(bound: int, count: int) -> list[int]:
    out, p = [], bound - 1
    while len(out) < count:
        if _is_prime(p):
            out.append(p)
        p -= 1
    return out


@dataclass(frozen=True)
class LocalWeights:
    """Monomer weight `mono` and weight `t` per directed edge, N colours."""

    N: int
    mono: Fraction
    t: Fraction

    @cached_property
    def statuses(self) -> list[tuple]:
        out = [("empty",), ("double",)]
        if self.N % 2:
            out.append(("u", 0))
        for j in range(self.N // 2):
            out.append(("d", j, +1))
            out.append(("d", j, -1))
        return out

    @property
    def S(self) -> int:
        return len(self.statuses)

    @cached_property
    def walk_status(self) -> int:
        """Status index of the walk colour in its positive orientation."""
        if self.N >= 2:
            return self.statuses.index(("d", 0, +1))
        return self.statuses.index(("u", 0))

    def edge_weight(self, s: int) -> Fraction:
        kind = self.statuses[s][0]
        if kind == "empty":
            return Fraction(1)
        if kind == "double":
            return Fraction(self.N, 2) * self.t * self.t
        return self.t

    def _flow(self, s: int, lower_end: bool) -> int:
        """+1 if the strand leaves the vertex, -1 if it enters, 0 if undirected."""
        st = self.statuses[s]
        if st[0] != "d":
            return 0
        return st[2] if lower_end else -st[2]

    def _colour(self, s: int):
        st = self.statuses[s]
        return st[:2] if st[0] in ("u", "d") else None

    def vertex_weight(self, kind: int, ends: list[tuple[int, bool]]) -> Fraction:
        """ends: (status, vertex is the lower end of the edge) per incident edge."""
        busy = [(s, lo) for s, lo in ends if s != 0]
        k = len(busy)
        if kind == POINT:
            return Fraction(1) if k == 0 else Fraction(0)
        if kind in (SOURCE, SINK):
            if k != 1:
                return Fraction(0)
            s, lo = busy[0]
            if self._colour(s) != self._colour(self.walk_status):
                return Fraction(0)
            want = 1 if kind == SOURCE else -1
            if self.N >= 2 and self._flow(s, lo) != want:
                return Fraction(0)
            return Fraction(1)
        if k == 0:
            return self.mono
        if k == 1:
            return Fraction(1) if busy[0][0] == 1 else Fraction(0)
        if k == 2:
            (s1, l1), (s2, l2) = busy
            c1, c2 = self._colour(s1), self._colour(s2)
            if c1 is None or c1 != c2:
                return Fraction(0)
            if c1[0] == "d" and self._flow(s1, l1) + self._flow(s2, l2) != 0:
                return Fraction(0)
            return Fraction(1)
        return Fraction(0)

    def site_rules(self, kind: int, ring: bool) -> list[tuple[int, int, int, int, Fraction]]:
        """Allowed (bottom, left, top, right, weight) at one site; weight owns top and right."""
        S = self.S
        sides = range(S) if ring else (0,)
        out = []
        for b in range(S):
            for lft in sides:
                for tp in range(S):
                    for r in sides:
                        w = self.vertex_weight(kind, [(b, False), (lft, False), (tp, True), (r, True)])
                        if w:
                            out.append((b, lft, tp, r, w * self.edge_weight(tp) * self.edge_weight(r)))
        return out

    def site_denominator(self, ring: bool) -> int:
        den = 1
        for kind in (GENERIC, SOURCE, SINK, POINT):
            for *_, w in self.site_rules(kind, ring):
                den = lcm(den, w.denominator)
        return den


class LayerBuilder:
    """Integer layer matrices for a d in {1, 2} torus; layer = sites sharing coordinate 1."""

    def __init__(self, geom: TorusGeom, weights: LocalWeights):
        if geom.d not in (1, 2):
            raise ValueError("layer transfer supports d in {1, 2}")
        require_even_L(geom.L)
        self.geom = geom
        self.w = weights
        self.ring = geom.d == 2
        self.m = geom.L if self.ring else 1
        self.S = weights.S
        self.den = weights.site_denominator(self.ring)
        self._rules = {}

    def rules(self, kind: int):
        if kind not in self._rules:
            rs = self.w.site_rules(kind, self.ring)
            arr = np.array([[b, l, t, r] for b, l, t, r, _ in rs], dtype=np.int64).reshape(-1, 4)
            vals = np.array([int(w * self.den) for *_, w in rs], dtype=np.int64)
            self._rules[kind] = (arr, vals)
        return self._rules[kind]

    def build(self, kinds: tuple[int, ...]):
        """COO (rows, cols, vals) of the layer matrix; kinds[j] is the kind at position j."""
        S, m = self.S, self.m
        wraps = np.arange(S if self.ring else 1, dtype=np.int64)
        cin = np.zeros(len(wraps), dtype=np.int64)
        cout = np.zeros(len(wraps), dtype=np.int64)
        wrap = wraps.copy()
        cur = wraps.copy()
        val = np.ones(len(wraps), dtype=np.int64)
        for j in range(m):
            arr, vals = self.rules(kinds[j])
            parts = []
            for (b, lft, tp, r), v in zip(arr, vals):
                sel = np.flatnonzero(cur == lft)
                if not len(sel):
                    continue
                parts.append((cin[sel] * S + b, cout[sel] * S + tp, wrap[sel],
                              np.full(len(sel), r, dtype=np.int64), val[sel] * v))
            if not parts:
                return (np.zeros(0, np.int64),) * 3
            cin, cout, wrap, cur, val = (np.concatenate(x) for x in zip(*parts))
            key = ((cin * S ** (j + 1) + cout) * S + wrap) * S + cur
            order = np.argsort(key, kind="stable")
            key, val = key[order], val[order]
            first = np.flatnonzero(np.concatenate(([True], key[1:] != key[:-1])))
            val = np.add.reduceat(val, first)
            key = key[first]
            cur = key % S
            wrap = (key // S) % S
            pair = key // (S * S)
            cout = pair % S ** (j + 1)
            cin = pair // S ** (j + 1)
        keep = cur == wrap
        cin, cout, val = cin[keep], cout[keep], val[keep]
        key = cin * S ** m + cout
        order = np.argsort(key, kind="stable")
        key, val = key[order], val[order]
        first = np.flatnonzero(np.concatenate(([True], key[1:] != key[:-1])))
        val = np.add.reduceat(val, first)
        key = key[first]
        if val.size and val.max() >= 1 << 62:
            raise OverflowError("layer weights exceed int64")
        return key // S ** m, key % S ** m, val

    @cached_property
    def labels(self) -> np.ndarray:
        """Sector label per layer state: directed fluxes, plus staggered charge when mono = 0."""
        S, m = self.S, self.m
        codes = np.arange(S ** m)
        digits = np.stack([(codes // S ** (m - 1 - j)) % S for j in range(m)], axis=1)
        cols = []
        nb = self.w.N // 2
        for c in range(nb):
            plus = self.w.statuses.index(("d", c, +1))
            minus = self.w.statuses.index(("d", c, -1))
            cols.append(((digits == plus).sum(1) - (digits == minus).sum(1)))
        if self.w.mono == 0:
            wt = np.array([0, 2] + [1] * (S - 2))
            sign = np.array([(-1) ** j for j in range(m)])
            cols.append((wt[digits] * sign).sum(1))
        if not cols:
            return np.zeros(len(codes), dtype=np.int64)
        lab = np.stack(cols, axis=1)
        _, inv = np.unique(lab, axis=0, return_inverse=True)
        return inv.reshape(-1).astype(np.int64)


class BlockMatrix:
    """Block-sparse square matrix over a fixed state labelling; one value channel."""

    def __init__(self, blocks: dict, mod: int | None):
        self.blocks = blocks
        self.mod = mod

    @staticmethod
    def from_coo(rows, cols, vals, labels, groups, local, mod):
        blocks: dict = {}
        la, lb = labels[rows], labels[cols]
        v = vals % mod if mod else vals.astype(np.float64)
        key = la * (labels.max() + 1) + lb
        order = np.argsort(key, kind="stable")
        key = key[order]
        cuts = np.flatnonzero(np.concatenate(([True], key[1:] != key[:-1], [True])))
        for s, e in zip(cuts[:-1], cuts[1:]):
            idx = order[s:e]
            a, b = int(la[idx[0]]), int(lb[idx[0]])
            B = np.zeros((len(groups[a]), len(groups[b])), dtype=np.float64)
            B[local[rows[idx]], local[cols[idx]]] = v[idx]
            blocks[(a, b)] = B
        return BlockMatrix(blocks, mod)

    def __matmul__(self, other: "BlockMatrix") -> "BlockMatrix":
        by_row: dict = {}
        for (b, c), B in other.blocks.items():
            by_row.setdefault(b, []).append((c, B))
        out: dict = {}
        for (a, b), A in self.blocks.items():
            for c, B in by_row.get(b, ()):
                P = A @ B
                if self.mod:
                    P = np.fmod(P, self.mod)
                if (a, c) in out:
                    out[(a, c)] += P
                    if self.mod:
                        out[(a, c)] = np.fmod(out[(a, c)], self.mod)
                else:
                    out[(a, c)] = P
        return BlockMatrix(out, self.mod)

    def trace(self):
        tot = 0 if self.mod else 0.0
        for (a, b), A in self.blocks.items():
            if a == b:
                if self.mod:
                    tot = (tot + int(np.trace(A.astype(np.int64)) % self.mod)) % self.mod
                else:
                    tot += float(np.trace(A))
        return tot

    def trace_with(self, other: "BlockMatrix"):
        """Tr(self @ other) without forming the product."""
        tot = 0 if self.mod else 0.0
        for (a, b), A in self.blocks.items():
            B = other.blocks.get((b, a))
            if B is None:
                continue
            if self.mod:
                prod = (A.astype(np.int64) * B.T.astype(np.int64)) % self.mod
                tot = (tot + int(prod.sum() % self.mod)) % self.mod
            else:
                tot += float((A * B.T).sum())
        return tot


def _identity(groups, mod):
    return BlockMatrix({(a, a): np.eye(len(g)) for a, g in enumerate(groups)}, mod)


def _crt(residues: list[int], primes: list[int]) -> int:
    x, M = 0, 1
    for r, p in zip(residues, primes):
        t = ((r - x) * pow(M, -1, p)) % p
        x += M * t
        M *= p
    return x


class LoopTransfer:
    """Exact Z^l and Z(o, y) for all y, for one choice of (N, mono, t)."""

    def __init__(self, geom: TorusGeom, N: int, mono, t=1):
        self.geom = geom
        self.weights = LocalWeights(int(N), Fraction(mono), Fraction(t))
        self.builder = LayerBuilder(geom, self.weights)
        lab = self.builder.labels
        nlab = int(lab.max()) + 1
        self.groups = [np.flatnonzero(lab == a) for a in range(nlab)]
        self.local = np.empty(len(lab), dtype=np.int64)
        for g in self.groups:
            self.local[g] = np.arange(len(g))
        biggest = max(len(g) for g in self.groups)
        bound = int((2 ** 53 / biggest) ** 0.5)
        self.prime_bound = min(bound, 1 << 26)
        self._coo: dict = {}

    @property
    def m(self) -> int:
        return self.builder.m

    def _layer(self, kinds: tuple[int, ...]):
        if kinds not in self._coo:
            self._coo[kinds] = self.builder.build(kinds)
        return self._coo[kinds]

    def _mat(self, kinds, mod):
        r, c, v = self._layer(kinds)
        return BlockMatrix.from_coo(r, c, v, self.builder.labels, self.groups, self.local, mod)

    def _position(self, site: int) -> tuple[int, int]:
        m = self.m
        return site // m, site % m

    def _channel(self, mod, targets: list[int]) -> tuple:
        """Scaled Z^l and scaled Z(o, y) for y in targets, in one channel."""
        L, m = self.geom.L, self.m
        gen = (GENERIC,) * m
        T = self._mat(gen, mod)
        powers = [_identity(self.groups, mod), T]
        for _ in range(2, L):
            powers.append(powers[-1] @ T)
        z_ell = (powers[-1] @ T).trace() if L > 1 else T.trace()
        o = self.geom.origin
        lo, po = self._position(o)
        out = {}
        if not targets:
            return z_ell, out
        src = list(gen)
        src[po] = SOURCE
        Mo = self._mat(tuple(src), mod)
        cyc = {}
        for y in targets:
            ly, py = self._position(y)
            r = (ly - lo) % L
            if r == 0:
                kinds = list(gen)
                if y == o:
                    kinds[po] = POINT
                else:
                    kinds[po], kinds[py] = SOURCE, SINK
                out[y] = self._mat(tuple(kinds), mod).trace_with(powers[L - 1])
                continue
            if r not in cyc:
                cyc[r] = powers[L - 1 - r] @ Mo @ powers[r - 1]
            snk = list(gen)
            snk[py] = SINK
            out[y] = cyc[r].trace_with(self._mat(tuple(snk), mod))
        return z_ell, out

    def compute(self, targets: list[int] | None = None) -> tuple[Fraction, dict[int, Fraction]]:
        """Exact (Z^l, {y: Z(o, y)}) for the given targets (default: all sites)."""
        if targets is None:
            targets = list(range(self.geom.n))
        D = self.builder.den ** self.geom.n
        fz, fy = self._channel(None, targets)
        biggest = max([fz] + list(fy.values()))
        need_bits = int(biggest * 1.01 + 2).bit_length() + 2
        per = self.prime_bound.bit_length() - 1
        primes = _primes_below(self.prime_bound, max(1, need_bits // per + 1))
        res_z, res_y = [], {y: [] for y in targets}
        for p in primes:
            z, ys = self._channel(p, targets)
            res_z.append(z)
            for y in targets:
                res_y[y].append(ys[y])

        def rebuild(res, approx):
            x = _crt(res, primes)
            if abs(x - approx) > max(1.0, 1e-6 * approx):
                raise ArithmeticError("modular reconstruction disagrees with the float pass")
            return Fraction(x, D)

        return rebuild(res_z, fz), {y: rebuild(res_y[y], fy[y]) for y in targets}
