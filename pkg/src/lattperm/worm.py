"""Monomer-worm Monte Carlo for the monomer correlation Xi_L(x) of uniform dimer covers.

State: a dimer cover, or a cover of the torus minus a tail and a head monomer.
From a closed state a uniformly chosen site s loses its dimer (tail s, head its
partner). From an open state the head picks one of its 2d neighbours y: if y is
the tail the worm closes, otherwise the dimer at y is pivoted onto (head, y)
and the head hops to the former partner of y. Every move is accepted; the
chain is reversible for the measure giving weight 1 to each open state and
weight L^d/(2d) to each closed state, so within each sector it is uniform.

The displacement histogram H(x) of head minus tail is proportional to
|D({o, x})|, and Xi(x) = (1/2d) H(x) / H(e1) since Xi(e1) = 1/(2d).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .torus import TorusGeom, require_even_L

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _tables(geom: TorusGeom):
    nbr = np.ascontiguousarray(geom.nbr, dtype=np.int64)
    digits = np.array([[(c + geom.L // 2 - 1) % geom.L for c in geom.coords(s)] for s in range(geom.n)],
                      dtype=np.int64)
    return nbr, digits


def initial_cover(geom: TorusGeom) -> np.ndarray:
    """Columnar cover: x paired with x + e1 when the first digit is even."""
    nbr, digits = _tables(geom)
    partner = np.full(geom.n, -1, dtype=np.int64)
    for s in range(geom.n):
        if digits[s, 0] % 2 == 0:
            t = int(nbr[s, 0])
            partner[s], partner[t] = t, s
    if np.any(partner < 0):
        raise RuntimeError("no initial dimer cover found")
    return partner


if numba is not None:
    @numba.njit(cache=True)
    def _run(partner, nbr, digits, L, steps, therm, batches, seed, cover_keys, record_closed):  # pragma: no cover
        np.random.seed(seed)
        n, two_d = nbr.shape
        d = digits.shape[1]
        hist = np.zeros((batches, n), dtype=np.int64)
        visits = np.zeros((batches, cover_keys.shape[0] if record_closed else 1), dtype=np.int64)
        tail = -1
        head = -1
        per = steps // batches
        total = therm + per * batches
        for it in range(total):
            if tail < 0:
                if record_closed and it >= therm:
                    key = np.int64(0)
                    for s in range(n):
                        key = key * 4
                        for j in range(d):
                            if partner[s] == nbr[s, 2 * j]:
                                key += j + 1
                    bb = (it - therm) // per
                    if bb >= batches:
                        bb = batches - 1
                    visits[bb, np.searchsorted(cover_keys, key)] += 1
                s = np.random.randint(n)
                p = partner[s]
                partner[s] = -1
                partner[p] = -1
                tail = s
                head = p
            else:
                y = nbr[head, np.random.randint(two_d)]
                if y == tail:
                    partner[head] = tail
                    partner[tail] = head
                    tail = -1
                    head = -1
                else:
                    z = partner[y]
                    partner[head] = y
                    partner[y] = head
                    partner[z] = -1
                    head = z
            if tail >= 0 and it >= therm:
                b = (it - therm) // per
                if b >= batches:
                    b = batches - 1
                idx = 0
                for i in range(d):
                    idx = idx * L + (digits[head, i] - digits[tail, i] + L // 2 - 1) % L
                hist[b, idx] += 1
        return hist, visits
else:  # pragma: no cover
    _run = None


def _require_numba():
    if _run is None:
        raise RuntimeError("worm sampling needs numba")


def chain_seed(seed: int, chain: int) -> int:
    from .rwalk import _splitmix
    return int(_splitmix(_splitmix(seed) ^ chain) % (2 ** 31 - 1))


@dataclass
class WormResult:
    geom: TorusGeom
    hist: np.ndarray  # (batches, n) displacement counts
    sweeps: int
    therm: int
    seed: int
    chains: int
    xi: np.ndarray = field(default=None)
    stderr: np.ndarray = field(default=None)

    def metadata(self) -> dict:
        return {"d": self.geom.d, "L": self.geom.L, "sweeps": self.sweeps, "therm": self.therm,
                "seed": self.seed, "chains": self.chains, "batches": int(self.hist.shape[0]),
                "open_samples": int(self.hist.sum())}

    def to_csv(self, odd_only: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.geom.d
        w.writerow([f"x_{i + 1}" for i in range(d)] + ["xi_hat", "stderr"])
        for s in range(self.geom.n):
            if odd_only and not self.geom.parity_array[s]:
                continue
            w.writerow(list(self.geom.coords(s)) + [f"{self.xi[s]:.10g}", f"{self.stderr[s]:.10g}"])
        return buf.getvalue()

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), sort_keys=True)


def symmetrise(geom: TorusGeom, hist: np.ndarray, maps=None) -> np.ndarray:
    """Average each row of `hist` over the point-group images of the displacement."""
    maps = maps if maps is not None else geom.symmetry_maps()
    out = np.zeros(hist.shape, dtype=float)
    for m in maps:
        out += hist[..., m]
    return out / len(maps)


def estimate(geom: TorusGeom, hist: np.ndarray, maps=None) -> tuple[np.ndarray, np.ndarray]:
    """Xi-hat from pooled counts; stderr from the spread of batch ratios."""
    sym = symmetrise(geom, hist, maps)
    e1 = geom.unit(1)
    two_d = 2 * geom.d
    pooled = sym.sum(axis=0)
    xi = pooled / (two_d * pooled[e1])
    per_batch = sym / (two_d * sym[:, e1:e1 + 1])
    B = hist.shape[0]
    stderr = per_batch.std(axis=0, ddof=1) / math.sqrt(B)
    return xi, stderr


def worm_run(geom: TorusGeom, sweeps: int, therm: int, seed: int, chains: int = 1,
             batches: int = 20) -> WormResult:
    """Sweeps count L^d worm steps each; batches per chain are pooled across chains."""
    require_even_L(geom.L)
    if geom.d not in (2, 3):
        raise ValueError("worm sampling supports d in {2, 3}")
    if batches < 20:
        raise ValueError("at least 20 batches are required")
    _require_numba()
    nbr, digits = _tables(geom)
    keys = np.zeros(1, dtype=np.int64)
    hist = np.zeros((batches, geom.n), dtype=np.int64)
    for c in range(chains):
        partner = initial_cover(geom)
        h, _ = _run(partner, nbr, digits, geom.L, sweeps * geom.n, therm * geom.n, batches,
                    chain_seed(seed, c), keys, False)
        hist += h
    res = WormResult(geom, hist, sweeps, therm, seed, chains)
    res.xi, res.stderr = estimate(geom, hist)
    return res


def cover_key(geom: TorusGeom, partner) -> int:
    """Base-4 digits per site: j+1 if the dimer at s points to s + e_{j+1}, else 0."""
    key = 0
    for s in range(geom.n):
        key *= 4
        for j in range(geom.d):
            if partner[s] == geom.nbr[s, 2 * j]:
                key += j + 1
    return key


def stationarity_check(geom: TorusGeom, steps: int, seed: int, batches: int = 100, sigma: float = 4.0) -> dict:
    """Closed-sector visit frequencies of every dimer cover against the uniform law.

    Frequencies are taken per batch of one chain; z-scores use the batch spread.
    """
    from .dimer import enumerate_covers
    _require_numba()
    if 2 * geom.n > 62:
        raise ValueError("cover keys need L^d <= 31")
    nbr, digits = _tables(geom)
    keys = []
    for cov in enumerate_covers(geom):
        keys.append(cover_key(geom, cov.partner))
    keys = np.array(sorted(keys), dtype=np.int64)
    partner = initial_cover(geom)
    _, visits = _run(partner, nbr, digits, geom.L, steps, steps // 10, batches, chain_seed(seed, 0), keys, True)
    per = visits / visits.sum(axis=1, keepdims=True)
    mean = per.mean(axis=0)
    se = per.std(axis=0, ddof=1) / math.sqrt(batches)
    target = 1 / len(keys)
    z = np.abs(mean - target) / np.maximum(se, 1e-300)
    return {"covers": len(keys), "target": target, "max_z": float(z.max()), "passed": bool(np.all(z <= sigma)),
            "closed_visits": int(visits.sum()), "steps": steps}


@dataclass
class DecayProfile:
    n: list[int]
    xi: list[float]
    stderr: list[float]
    exponent: float | None = None
    exponent_err: float | None = None
    minimum: float | None = None

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def decay_profile(geom: TorusGeom, xi: np.ndarray, stderr: np.ndarray, n_max: int | None = None,
                  n_min: int = 3) -> DecayProfile:
    """Axis profile at odd n <= n_max (default L/4); power-law fit for d=2, minimum otherwise.

    The fit is weighted by relative errors and skips n = 1, the exact normalisation point.
    """
    n_max = n_max if n_max is not None else geom.L // 4
    ns = [k for k in range(1, n_max + 1, 2)]
    sites = [geom.unit(1, k) for k in ns]
    vals = [float(xi[s]) for s in sites]
    errs = [float(stderr[s]) for s in sites]
    prof = DecayProfile(ns, vals, errs, minimum=min(vals))
    if geom.d == 2:
        fit = [(k, v, e) for k, v, e in zip(ns, vals, errs) if k >= n_min and v > 0 and e > 0]
        if len(fit) < 2:
            return prof
        x = np.log([k for k, _, _ in fit])
        y = np.log([v for _, v, _ in fit])
        w = np.array([v / max(e, 1e-12) for _, v, e in fit]) ** 2
        A = np.vstack([x, np.ones_like(x)]).T
        Aw = A * np.sqrt(w)[:, None]
        yw = y * np.sqrt(w)
        coef, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
        cov = np.linalg.inv(Aw.T @ Aw)
        prof.exponent = float(coef[0])
        prof.exponent_err = float(math.sqrt(cov[0, 0]))
    return prof
