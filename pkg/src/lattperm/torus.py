"""Torus geometry, the extended torus with virtual sites, and edge reflections.

Coordinates live in (-L/2, L/2]. Sites are dense integer ids in lexicographic
order over those coordinates (first coordinate most significant).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np


class GeometryError(ValueError):
    pass


def require_even_L(L: int) -> None:
    if L % 2:
        raise GeometryError(f"L={L} must be even for this operation")


@dataclass(frozen=True)
class TorusGeom:
    d: int
    L: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise GeometryError(f"dimension d={self.d} must be a positive integer")
        if not isinstance(self.L, (int, np.integer)) or self.L < 4:
            raise GeometryError(
                f"L={self.L} rejected: side length must be at least 4 (L=2 gives a multigraph)")

    @property
    def site_count(self) -> int:
        return self.L ** self.d

    @property
    def n(self) -> int:
        return self.L ** self.d

    # coordinate conventions -------------------------------------------------

    def reduce(self, c: int) -> int:
        """Representative of c mod L in (-L/2, L/2]."""
        h = self.L // 2
        return (c + h - 1) % self.L - h + 1

    def _digit(self, c: int) -> int:
        return (int(c) + self.L // 2 - 1) % self.L

    def site_index(self, coords: Sequence[int]) -> int:
        coords = tuple(coords)
        if len(coords) != self.d:
            raise GeometryError(f"expected {self.d} coordinates, got {len(coords)}")
        s = 0
        for c in coords:
            s = s * self.L + self._digit(c)
        return s

    def coords(self, site: int) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coord_array[site])

    @cached_property
    def coord_array(self) -> np.ndarray:
        h = self.L // 2
        vals = np.arange(-h + 1, h + 1)
        grid = np.array(list(product(vals, repeat=self.d)), dtype=np.int64)
        return grid.reshape(self.n, self.d)

    @property
    def origin(self) -> int:
        return self.site_index((0,) * self.d)

    def unit(self, i: int, n: int = 1) -> int:
        """Site n*e_i, with axes numbered 1..d."""
        if not 1 <= i <= self.d:
            raise GeometryError(f"axis {i} outside 1..{self.d}")
        c = [0] * self.d
        c[i - 1] = n
        return self.site_index(c)

    # adjacency --------------------------------------------------------------

    @cached_property
    def nbr(self) -> np.ndarray:
        """(n, 2d) array; column 2i is +e_{i+1}, column 2i+1 is -e_{i+1}."""
        out = np.empty((self.n, 2 * self.d), dtype=np.int64)
        for s in range(self.n):
            x = self.coords(s)
            for i in range(self.d):
                for k, step in enumerate((1, -1)):
                    y = list(x)
                    y[i] = self.reduce(y[i] + step)
                    out[s, 2 * i + k] = self.site_index(y)
        return out

    def neighbors(self, site: int) -> list[int]:
        return [int(v) for v in self.nbr[site]]

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges (x, y) with x < y, sorted."""
        es = set()
        for x in range(self.n):
            for y in self.nbr[x]:
                es.add((min(x, int(y)), max(x, int(y))))
        return sorted(es)

    def is_edge(self, x: int, y: int) -> bool:
        return y in self.nbr[x]

    # group structure --------------------------------------------------------

    def add(self, x: int, y: int) -> int:
        a, b = self.coord_array[x], self.coord_array[y]
        return self.site_index([self.reduce(int(u + v)) for u, v in zip(a, b)])

    def sub(self, y: int, x: int) -> int:
        """The site y - x."""
        a, b = self.coord_array[y], self.coord_array[x]
        return self.site_index([self.reduce(int(u - v)) for u, v in zip(a, b)])

    def neg(self, x: int) -> int:
        return self.site_index([self.reduce(-int(u)) for u in self.coord_array[x]])

    @cached_property
    def diff_table(self) -> np.ndarray:
        """table[x, y] = site id of y - x."""
        t = np.empty((self.n, self.n), dtype=np.int64)
        digits = (self.coord_array + self.L // 2 - 1) % self.L
        for x in range(self.n):
            dd = (digits - digits[x] + (self.L // 2 - 1)) % self.L
            idx = np.zeros(self.n, dtype=np.int64)
            for i in range(self.d):
                idx = idx * self.L + dd[:, i]
            t[x] = idx
        return t

    # parity -----------------------------------------------------------------

    def parity(self, site: int) -> int:
        return int(self.coord_array[site].sum()) % 2

    @cached_property
    def parity_array(self) -> np.ndarray:
        return self.coord_array.sum(axis=1) % 2

    @cached_property
    def odd_sites(self) -> list[int]:
        return [s for s in range(self.n) if self.parity_array[s] == 1]

    @cached_property
    def even_sites(self) -> list[int]:
        return [s for s in range(self.n) if self.parity_array[s] == 0]

    def graph_distance(self, x: int, y: int) -> int:
        z = self.coord_array[self.sub(y, x)]
        return int(np.abs(z).sum())

    def on_axis(self, x: int, i: int = 1) -> bool:
        c = self.coord_array[x]
        return all(c[j] == 0 for j in range(self.d) if j != i - 1)

    def symmetry_maps(self) -> list[np.ndarray]:
        """Site permutations from coordinate permutations and sign flips (fix o)."""
        from itertools import permutations
        maps = []
        for perm in permutations(range(self.d)):
            for signs in product((1, -1), repeat=self.d):
                m = np.empty(self.n, dtype=np.int64)
                for s in range(self.n):
                    c = self.coord_array[s]
                    m[s] = self.site_index([self.reduce(int(signs[j] * c[perm[j]])) for j in range(self.d)])
                maps.append(m)
        return maps


@dataclass(frozen=True)
class ExtendedTorusGeom:
    """Original sites 0..n-1 and virtual sites n..2n-1 (virtual of x is x+n)."""

    base: TorusGeom

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def vertex_count(self) -> int:
        return 2 * self.base.n

    def is_virtual(self, v: int) -> bool:
        return v >= self.base.n

    def virtual(self, x: int) -> int:
        return x + self.base.n

    def original(self, v: int) -> int:
        return v - self.base.n if v >= self.base.n else v

    @cached_property
    def edges(self) -> list[tuple[int, int]]:
        """Original edges first (sorted), then vertical edges (x, x+n)."""
        return list(self.base.edges) + [(x, x + self.n) for x in range(self.n)]

    @cached_property
    def edge_id(self) -> dict[tuple[int, int], int]:
        out = {}
        for k, (a, b) in enumerate(self.edges):
            out[(a, b)] = k
            out[(b, a)] = k
        return out

    def is_vertical(self, e: int) -> bool:
        return e >= len(self.base.edges)

    @cached_property
    def incident(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for k, (a, b) in enumerate(self.edges):
            inc[a].append(k)
            inc[b].append(k)
        return inc

    def neighbors(self, v: int) -> list[int]:
        out = []
        for k in self.incident[v]:
            a, b = self.edges[k]
            out.append(b if a == v else a)
        return out

    def degree(self, v: int) -> int:
        return len(self.incident[v])


@dataclass(frozen=True)
class ReflectionPlane:
    """Plane {z_axis = u} through edge midpoints; axis in 1..d, u - 1/2 integer."""

    geom: TorusGeom
    axis: int
    u: Fraction

    def __post_init__(self):
        u = Fraction(self.u)
        object.__setattr__(self, "u", u)
        if not 1 <= self.axis <= self.geom.d:
            raise GeometryError(
                f"reflection axis {self.axis} not allowed; planes must be orthogonal to e_1..e_d")
        if (u - Fraction(1, 2)).denominator != 1:
            raise GeometryError(f"offset u={u} must satisfy u - 1/2 integer")
        require_even_L(self.geom.L)

    @cached_property
    def site_map(self) -> np.ndarray:
        g = self.geom
        two_u = int(2 * self.u)
        out = np.empty(g.n, dtype=np.int64)
        for s in range(g.n):
            c = list(g.coords(s))
            c[self.axis - 1] = g.reduce(two_u - c[self.axis - 1])
            out[s] = g.site_index(c)
        return out

    def reflect(self, site: int) -> int:
        return int(self.site_map[site])

    def reflect_ext(self, v: int) -> int:
        n = self.geom.n
        if v >= n:
            return int(self.site_map[v - n]) + n
        return int(self.site_map[v])

    @cached_property
    def plus_sites(self) -> list[int]:
        """Original sites of the + half: axis coordinate in u+1/2 .. u+L/2-1/2 (mod L)."""
        g = self.geom
        lo = int(self.u + Fraction(1, 2))
        keep = {g.reduce(lo + j) for j in range(g.L // 2)}
        return [s for s in range(g.n) if g.coords(s)[self.axis - 1] in keep]

    def plus_vertices(self) -> list[int]:
        """+ half of the extended torus (original and virtual)."""
        n = self.geom.n
        return self.plus_sites + [s + n for s in self.plus_sites]


def all_planes(geom: TorusGeom) -> list[ReflectionPlane]:
    """One plane per distinct reflection: u in {1/2, 3/2, ..., L/2 - 1/2} along each axis."""
    out = []
    for i in range(1, geom.d + 1):
        for j in range(geom.L // 2):
            out.append(ReflectionPlane(geom, i, Fraction(2 * j + 1, 2)))
    return out


def parse_site(geom: TorusGeom, text: str | Iterable[int]) -> int:
    if isinstance(text, str):
        parts = [int(p) for p in text.replace(" ", "").split(",") if p]
    else:
        parts = [int(p) for p in text]
    return geom.site_index([geom.reduce(p) for p in parts])
