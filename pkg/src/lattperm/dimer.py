"""Dimer covers of the torus with removed sites, and monomer-monomer correlations.

Two independent counters: a site-order backtracking search (with a cache keyed
on the set of covered sites) and a layer-by-layer profile transfer matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .torus import TorusGeom, require_even_L


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class DimerCover:
    """partner[x] is the matched neighbour of x, or -1 for removed sites."""

    partner: tuple[int, ...]

    def dimers(self) -> list[tuple[int, int]]:
        return [(x, y) for x, y in enumerate(self.partner) if y > x]

    def is_valid(self, geom: TorusGeom, removed: Iterable[int] = ()) -> bool:
        rem = set(removed)
        for x, y in enumerate(self.partner):
            if x in rem:
                if y != -1:
                    return False
                continue
            if y < 0 or self.partner[y] != x or not geom.is_edge(x, y):
                return False
        return True


def _check(geom: TorusGeom) -> None:
    require_even_L(geom.L)


def _forward(geom: TorusGeom) -> list[list[int]]:
    return [sorted({int(y) for y in geom.nbr[x] if y > x}) for x in range(geom.n)]


def enumerate_covers(geom: TorusGeom, removed: Iterable[int] = ()) -> Iterator[DimerCover]:
    """All covers of T_L minus `removed`; match the first unmatched site, in index order."""
    _check(geom)
    n = geom.n
    nbrs = [[int(y) for y in geom.nbr[x]] for x in range(n)]
    partner = [-2] * n
    for r in removed:
        partner[r] = -1

    def rec(p: int):
        while p < n and partner[p] != -2:
            p += 1
        if p == n:
            yield DimerCover(tuple(partner))
            return
        for q in sorted(nbrs[p]):
            if partner[q] == -2 and q != p:
                partner[p], partner[q] = q, p
                yield from rec(p + 1)
                partner[p] = partner[q] = -2

    yield from rec(0)


def _site_order_count(n: int, fwd: list[list[int]], start: int) -> int:
    """Match the first unmatched site with each free forward neighbour, in index order.

    Partial states are keyed on the bitmask of covered sites; equal masks are
    merged with multiplicity, so the search is a level-by-level sweep over p.
    """
    if n <= 64:
        one = np.uint64(1)
        S = np.array([start], dtype=np.uint64)
        C = np.array([1], dtype=np.int64)
        for p in range(n):
            bp = np.uint64(p)
            cov = ((S >> bp) & one).astype(bool)
            parts, cs = [S[cov]], [C[cov]]
            Sf, Cf = S[~cov], C[~cov]
            for q in fwd[p]:
                bq = np.uint64(q)
                sel = ((Sf >> bq) & one) == 0
                parts.append(Sf[sel] | (one << bp) | (one << bq))
                cs.append(Cf[sel])
            S = np.concatenate(parts)
            C = np.concatenate(cs)
            if not len(S):
                return 0
            order = np.argsort(S, kind="stable")
            S, C = S[order], C[order]
            first = np.flatnonzero(np.concatenate(([True], S[1:] != S[:-1])))
            C = np.add.reduceat(C, first)
            S = S[first]
        return int(C.sum())
    states = {start: 1}
    for p in range(n):
        nxt: dict[int, int] = {}
        bit = 1 << p
        for mask, c in states.items():
            if mask & bit:
                nxt[mask] = nxt.get(mask, 0) + c
                continue
            for q in fwd[p]:
                b = 1 << q
                if not mask & b:
                    k = mask | bit | b
                    nxt[k] = nxt.get(k, 0) + c
        states = nxt
    return sum(states.values())


def _section_symmetries(geom: TorusGeom) -> list[np.ndarray]:
    """Site maps acting on coordinates 2..d only (translations, flips, swaps)."""
    from itertools import permutations, product
    d, L = geom.d, geom.L
    maps = []
    rest = list(range(1, d))
    digits = (geom.coord_array + L // 2 - 1) % L
    for perm in permutations(rest):
        for signs in product((1, -1), repeat=d - 1):
            for shift in product(range(L), repeat=d - 1):
                new = digits.copy()
                for j, src in enumerate(perm):
                    new[:, 1 + j] = (signs[j] * digits[:, src] + shift[j]) % L
                idx = np.zeros(geom.n, dtype=np.int64)
                for i in range(d):
                    idx = idx * L + new[:, i]
                maps.append(idx)
    return maps


def count_covers_backtracking(geom: TorusGeom, removed: Iterable[int] = ()) -> int:
    """|D(removed)| by site-order search: match the first unmatched site.

    For d >= 3 the search branches first on the set of cross-section
    positions whose dimer wraps across the boundary of the first axis;
    branches related by a cross-section symmetry preserving `removed` are
    counted once with multiplicity.
    """
    _check(geom)
    n = geom.n
    rem = sorted(set(removed))
    if (n - len(rem)) % 2:
        return 0
    start = 0
    for r in rem:
        start |= 1 << r
    fwd_all = [sorted({int(y) for y in geom.nbr[x] if y > x}) for x in range(n)]
    if geom.d < 3:
        return _site_order_count(n, fwd_all, start)
    m = geom.L ** (geom.d - 1)
    last = (geom.L - 1) * m
    fwd = [[q for q in fwd_all[p] if not (p < m and q >= last)] for p in range(n)]
    remset = set(rem)
    group = [g for g in _section_symmetries(geom) if {int(g[r]) for r in rem} == remset]
    seen = np.zeros(1 << m, dtype=bool)
    total = 0
    for B in range(1 << m):
        if seen[B]:
            continue
        members = set()
        pos = [j for j in range(m) if B >> j & 1]
        for g in group:
            members.add(sum(1 << int(g[j]) for j in pos))
        for b in members:
            seen[b] = True
        mask = start
        ok = True
        for j in pos:
            a, b = j, j + last
            if (mask >> a) & 1 or (mask >> b) & 1:
                ok = False
                break
            mask |= (1 << a) | (1 << b)
        if not ok:
            continue
        total += len(members) * _site_order_count(n, fwd, mask)
    return total


# transfer matrix --------------------------------------------------------------

def _layer_matchings(geom: TorusGeom) -> tuple[list[int], np.ndarray]:
    """Perfect-matching counts of every subset of one cross-section layer.

    The layer is the (d-1)-torus of sites sharing the first coordinate;
    returns (layer offsets, f) with f[S] = number of perfect matchings of S.
    """
    m = geom.L ** (geom.d - 1)
    # sites of the layer with first coordinate digit 0 are ids 0..m-1
    local_nbrs = []
    for j in range(m):
        ys = []
        for col in range(2, 2 * geom.d):
            ys.append(int(geom.nbr[j, col]))
        local_nbrs.append(sorted(set(ys)))
    size = 1 << m
    f = np.zeros(size, dtype=object if m > 20 else np.int64)
    f[0] = 1
    for S in range(1, size):
        if bin(S).count("1") % 2:
            continue
        i = (S & -S).bit_length() - 1
        rest = S ^ (1 << i)
        tot = 0
        for j in local_nbrs[i]:
            if rest >> j & 1:
                tot += f[rest ^ (1 << j)]
        f[S] = tot
    return list(range(m)), f


def _layer_masks(geom: TorusGeom, removed: Iterable[int]) -> list[int]:
    m = geom.L ** (geom.d - 1)
    masks = [0] * geom.L
    for r in removed:
        masks[r // m] |= 1 << (r % m)
    return masks


def _transfer_matrix(f: np.ndarray, m: int, rmask: int):
    """T[a, b] = f(layer minus a, b, removed) for disjoint a, b avoiding the removed set."""
    size = 1 << m
    full = size - 1
    rows, cols, vals = [], [], []
    for U in range(size):
        if U & rmask:
            continue
        val = f[full ^ U ^ rmask]
        if not val:
            continue
        a = U
        while True:
            rows.append(a)
            cols.append(U ^ a)
            vals.append(val)
            if a == 0:
                break
            a = (a - 1) & U
    return rows, cols, vals


def count_covers_transfer(geom: TorusGeom, removed: Iterable[int] = (), max_states: int = 1 << 16) -> int:
    """|D(removed)| by a profile transfer matrix along the first axis.

    The profile of a layer boundary is the bitmask of cross-section sites
    whose dimer crosses it. Only d in {2, 3} is supported.
    """
    _check(geom)
    if geom.d not in (2, 3):
        raise InfeasibleError("transfer counter supports d in {2, 3}")
    removed = list(removed)
    m = geom.L ** (geom.d - 1)
    size = 1 << m
    if size > max_states:
        est = 8 * size * size
        raise InfeasibleError(
            f"profile table has 2^{m} states; a dense layer matrix would need about {est:.3g} bytes")
    if (geom.n - len(set(removed))) % 2:
        return 0
    _, f = _layer_matchings(geom)
    masks = _layer_masks(geom, removed)
    if size <= 1 << 10:
        mats = []
        for k in range(geom.L):
            T = np.zeros((size, size), dtype=object)
            r, c, v = _transfer_matrix(f, m, masks[k])
            for a, b, val in zip(r, c, v):
                T[a, b] = int(val)
            mats.append(T)
        P = mats[0]
        for T in mats[1:]:
            P = P.dot(T)
        return int(sum(P[i, i] for i in range(size)))
    # large profile: sparse symmetric layer matrices, trace by row chunks
    mats = []
    for k in range(geom.L):
        r, c, v = _transfer_matrix(f, m, masks[k])
        mats.append(sp.csr_matrix((np.array(v, dtype=np.int64), (r, c)), shape=(size, size)))
    half = geom.L // 2
    left, right = mats[:half], mats[half:][::-1]
    total = 0
    chunk = 1024
    for start in range(0, size, chunk):
        sl = slice(start, min(size, start + chunk))
        A = left[0][sl]
        for T in left[1:]:
            A = A @ T
        B = right[0][sl]
        for T in right[1:]:
            B = B @ T
        total += int(A.multiply(B).sum(dtype=np.int64)) if A.nnz else 0
    return total


def count_covers(geom: TorusGeom, removed: Iterable[int] = (), method: str = "auto") -> int:
    if method == "backtracking":
        return count_covers_backtracking(geom, removed)
    if method == "transfer":
        return count_covers_transfer(geom, removed)
    if geom.d in (2, 3) and geom.L ** (geom.d - 1) <= 16:
        return count_covers_transfer(geom, removed)
    return count_covers_backtracking(geom, removed)


def monomer_correlation(geom: TorusGeom, x: int, method: str = "auto") -> Fraction:
    """Xi_L(x) = |D({o, x})| / |D(empty)|."""
    z = count_covers(geom, (), method)
    if z == 0:
        raise ZeroDivisionError("no dimer covers of the torus")
    o = geom.origin
    if x == o:
        return Fraction(0)
    return Fraction(count_covers(geom, (o, x), method), z)


def monomer_correlation_table(geom: TorusGeom, method: str = "auto") -> dict[int, Fraction]:
    z = count_covers(geom, (), method)
    if z == 0:
        raise ZeroDivisionError("no dimer covers of the torus")
    o = geom.origin
    out = {}
    for x in range(geom.n):
        out[x] = Fraction(0) if x == o else Fraction(count_covers(geom, (o, x), method), z)
    return out
