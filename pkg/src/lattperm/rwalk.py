"""Expected number of returns r_d of the simple random walk on Z^d.

Quadrature: r_d = G(0) - 1 where G(0) = (2 pi)^(-d) int dk / (1 - phi(k)),
phi(k) = (1/d) sum_i cos k_i. The innermost k_d integral is done exactly,
int dk/(2 pi) (a - cos k)^(-1) = (a^2 - 1)^(-1/2), and the remaining
(d-1)-dimensional integral by a half-cell-shifted midpoint rule with
Richardson extrapolation (the error is O(1/M)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


@dataclass
class WalkEstimate:
    d: int
    value: float
    err: float
    method: str
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"d": self.d, "value": self.value, "err": self.err, "method": self.method, **self.details}


def _require_transient(d: int) -> None:
    if d <= 2:
        raise ValueError(f"d={d}: the walk is recurrent and the return-count integral diverges (need d >= 3)")


def _midpoint(M: int) -> np.ndarray:
    return -np.pi + (np.arange(M) + 0.5) * 2 * np.pi / M


def _green_origin_midpoint(d: int, M: int) -> float:
    """G(0) with the k_d integral done exactly, midpoint rule in the rest."""
    k = _midpoint(M)
    c = np.cos(k)
    # sum of cosines over d-2 coordinates, then loop over the first one to bound memory
    rest = np.zeros(1)
    for _ in range(d - 2):
        rest = (rest[:, None] + c[None, :]).ravel()
    tot = 0.0
    for c1 in c:
        a = d - c1 - rest
        tot += float(np.sum(d / np.sqrt(a * a - 1)))
    return tot / M ** (d - 1)


def r_quadrature(d: int, M: int = 512) -> WalkEstimate:
    """r_d from grids M and 2M; value is the Richardson extrapolant."""
    _require_transient(d)
    coarse = _green_origin_midpoint(d, M) - 1
    fine = _green_origin_midpoint(d, 2 * M) - 1
    value = 2 * fine - coarse
    rel = abs(fine - coarse) / abs(fine)
    return WalkEstimate(d, value, abs(value - fine), "quadrature",
                        {"grid": M, "coarse": coarse, "fine": fine, "richardson_rel_change": rel,
                         "richardson_ok": rel < 0.005})


def half_step_integral(d: int, M: int = 256, m: int | None = None) -> float:
    """(2 pi)^(-d) int cos(k_1/2) (1 - J^(m+1)) / (1 - J) dk with J = (cos(k_1/2) + sum_{i>1} cos k_i)/d.

    With m=None the factor (1 - J^(m+1)) is dropped. This half-step kernel does
    not reproduce return probabilities (cos(k_1/2) is not a character of the
    period-2 pi dual circle); it is kept to quantify that gap.
    """
    k = _midpoint(M)
    c = np.cos(k)
    rest = np.zeros(1)
    for _ in range(d - 1):
        rest = (rest[:, None] + c[None, :]).ravel()
    tot = 0.0
    for k1 in k:
        h = math.cos(k1 / 2)
        J = (h + rest) / d
        num = h * (1 - J ** (m + 1)) if m is not None else h
        tot += float(np.sum(num / (1 - J)))
    return tot / M ** d


def lattice_partial_sum_integral(d: int, m: int, M: int = 64) -> float:
    """(2 pi)^(-d) int cos(k_1) (1 - phi^(m+1)) / (1 - phi) dk = sum_{n<=m} P(S_n = e_1)."""
    k = _midpoint(M)
    c = np.cos(k)
    rest = np.zeros(1)
    for _ in range(d - 1):
        rest = (rest[:, None] + c[None, :]).ravel()
    tot = 0.0
    for c1 in c:
        phi = (c1 + rest) / d
        # (1 - phi^(m+1)) / (1 - phi) = sum_{n<=m} phi^n, evaluated without the removable pole
        geo = np.zeros_like(phi)
        p = np.ones_like(phi)
        for _ in range(m + 1):
            geo += p
            p *= phi
        tot += float(np.sum(c1 * geo))
    return tot / M ** d


def return_probabilities_dp(d: int, m: int, target: tuple[int, ...] | None = None) -> list[float]:
    """P(S_n = target) for n = 0..m by exact propagation on the box |x_i| <= m."""
    target = target or (1,) + (0,) * (d - 1)
    size = 2 * m + 3
    p = np.zeros((size,) * d)
    centre = (m + 1,) * d
    p[centre] = 1.0
    out = []
    idx = tuple(c + t for c, t in zip(centre, target))
    for n in range(m + 1):
        out.append(float(p[idx]))
        q = np.zeros_like(p)
        for ax in range(d):
            q += np.roll(p, 1, axis=ax) + np.roll(p, -1, axis=ax)
        p = q / (2 * d)
    return out


@dataclass
class PartialSumReport:
    d: int
    m: int
    lhs: float
    rhs: float
    rhs_half_step: float
    passed: bool

    def as_dict(self) -> dict:
        return self.__dict__.copy()


def partial_sum_identity(d: int, m: int, M: int = 64, rel_tol: float = 0.005) -> PartialSumReport:
    """sum_{n<=m} P(S_n = e1): exact DP against the lattice Fourier integral.

    The half-step kernel value is reported alongside for comparison.
    """
    if m > 20:
        raise ValueError("m <= 20")
    lhs = sum(return_probabilities_dp(d, m))
    rhs = lattice_partial_sum_integral(d, m, M)
    half = half_step_integral(d, M, m)
    ok = abs(lhs - rhs) <= rel_tol * max(abs(lhs), 1e-12) or abs(lhs - rhs) < 1e-12
    return PartialSumReport(d, m, lhs, rhs, half, ok)


def n_window(r_d: float) -> dict:
    """(1/2d)(2/N - r_d/2) > 0 iff N < 4/r_d."""
    bound = 4 / r_d
    return {"r_d": r_d, "N_below": bound, "N_max": math.ceil(bound) - 1}


# Monte Carlo ------------------------------------------------------------------------

_MASK = (1 << 64) - 1


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _walk_returns_py(d, trials, steps, seeds):
    out = np.zeros(trials, dtype=np.int64)
    rng = np.random.default_rng(int(seeds[0]))
    for t in range(trials):
        moves = rng.integers(0, 2 * d, size=steps)
        pos = np.zeros((steps + 1, d), dtype=np.int64)
        for ax in range(d):
            delta = np.where(moves == 2 * ax, 1, 0) - np.where(moves == 2 * ax + 1, 1, 0)
            pos[1:, ax] = np.cumsum(delta)
        out[t] = int(np.sum(np.all(pos[1:] == 0, axis=1)))
    return out


if numba is not None:
    @numba.njit(cache=True)
    def _walk_returns(d, trials, steps, seeds):  # pragma: no cover - compiled
        out = np.zeros(trials, dtype=np.int64)
        pos = np.zeros(d, dtype=np.int64)
        for t in range(trials):
            s = np.uint64(seeds[t])
            for i in range(d):
                pos[i] = 0
            dist = 0
            count = 0
            n = 0
            while n < steps:
                # xorshift64*
                s ^= s >> np.uint64(12)
                s ^= s << np.uint64(25)
                s ^= s >> np.uint64(27)
                r = s * np.uint64(2685821657736338717)
                # up to 21 moves from one draw, 3 bits each, rejecting codes >= 2d
                for _ in range(21):
                    c = int(r & np.uint64(7))
                    r >>= np.uint64(3)
                    if c >= 2 * d:
                        continue
                    ax = c >> 1
                    if c & 1:
                        if pos[ax] > 0:
                            dist -= 1
                        else:
                            dist += 1
                        pos[ax] -= 1
                    else:
                        if pos[ax] < 0:
                            dist -= 1
                        else:
                            dist += 1
                        pos[ax] += 1
                    n += 1
                    if dist == 0:
                        count += 1
                    if n >= steps:
                        break
            out[t] = count
        return out
else:  # pragma: no cover
    _walk_returns = None


def _trial_seeds(seed: int, trials: int) -> np.ndarray:
    base = _splitmix(seed & _MASK)
    out = np.empty(trials, dtype=np.uint64)
    x = base
    for t in range(trials):
        x = _splitmix(x)
        out[t] = x or 1
    return out


def _tail_bound(d: int, steps: int) -> float:
    """Leading-order expected returns after `steps`: sum_{n>steps} 2 (d/(2 pi n))^(d/2) over even n."""
    c = 2 * (d / (2 * math.pi)) ** (d / 2)
    # sum over even n > steps of n^(-d/2) ~ (1/2) int_steps^inf n^(-d/2) dn
    return c * 0.5 * steps ** (1 - d / 2) / (d / 2 - 1)


def r_montecarlo(d: int, trials: int = 10 ** 6, max_steps: int = 10 ** 5, seed: int = 0,
                 batches: int = 1) -> WalkEstimate:
    """Mean number of returns before `max_steps`; stderr from the sample variance."""
    _require_transient(d)
    seeds = _trial_seeds(seed, trials)
    counts = (_walk_returns if _walk_returns is not None else _walk_returns_py)(d, trials, max_steps, seeds)
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    tail = _tail_bound(d, max_steps)
    return WalkEstimate(d, mean, se, "mc", {"trials": trials, "max_steps": max_steps, "seed": seed,
                                            "truncation_tail_estimate": tail,
                                            "value_plus_tail": mean + tail})
