"""Fourier analysis on the dual torus and the finite-L infrared bound.

Dual points share the site indexing of TorusGeom: the dual point with index s
is k = (2 pi / L) * coords(s), coords in (-L/2, L/2].
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .torus import TorusGeom, require_even_L

IMAG_TOL = 1e-12


def dual_points(geom: TorusGeom) -> np.ndarray:
    """(n, d) array of k vectors in site order."""
    return 2 * np.pi * geom.coord_array / geom.L


def mode_p(geom: TorusGeom) -> int:
    require_even_L(geom.L)
    return geom.site_index([geom.L // 2] * geom.d)


def _phase(geom: TorusGeom, sign: int) -> np.ndarray:
    c = geom.coord_array.astype(np.int64)
    dots = (c @ c.T) % geom.L
    return np.exp(sign * 2j * np.pi * dots / geom.L)


@dataclass
class Spectrum:
    geom: TorusGeom
    values: np.ndarray
    tag: str = "f"

    def real(self, tol: float = IMAG_TOL) -> np.ndarray:
        resid = float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0
        if resid > tol:
            raise ValueError(f"spectrum {self.tag} has imaginary residue {resid:.3e} > {tol:.0e}")
        return self.values.real

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.geom.d
        w.writerow([f"k_{i + 1}" for i in range(d)] + ["re", "im"])
        ks = dual_points(self.geom)
        for s in range(self.geom.n):
            w.writerow([f"{x:.17g}" for x in ks[s]] + [f"{self.values[s].real:.17g}", f"{self.values[s].imag:.17g}"])
        return buf.getvalue()


def dft(geom: TorusGeom, f, tag: str = "f") -> Spectrum:
    """f_hat(k) = sum_x exp(-i k.x) f(x), plain O(L^(2d))."""
    f = np.asarray(f, dtype=float)
    return Spectrum(geom, _phase(geom, -1) @ f, tag)


def idft(spec: Spectrum) -> np.ndarray:
    """f(x) = |T|^(-1) sum_k exp(i k.x) f_hat(k); real part, residue checked."""
    geom = spec.geom
    out = _phase(geom, 1) @ spec.values / geom.n
    resid = float(np.max(np.abs(out.imag)))
    if resid > 1e-10:
        raise ValueError(f"inverse transform not real: residue {resid:.3e}")
    return out.real


def epsilon(k) -> float | np.ndarray:
    """2 sum_j (1 - cos k_j)."""
    k = np.asarray(k, dtype=float)
    return 2 * np.sum(1 - np.cos(k), axis=-1)


# two-point functions --------------------------------------------------------

def g_arrays(geom: TorusGeom, N: int, rho, g: dict | None = None):
    """(G, G^o, G^e) as float arrays over sites, from exact values."""
    from .permutation import two_point_table
    g = g if g is not None else two_point_table(geom, N, rho)
    G = np.array([float(g[s]) for s in range(geom.n)])
    odd = geom.parity_array.astype(bool)
    return G, np.where(odd, G, 0.0), np.where(odd, 0.0, G)


@dataclass
class Report:
    check: str
    params: dict
    passed: bool
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def _params(geom: TorusGeom, N, rho) -> dict:
    return {"d": geom.d, "L": geom.L, "N": N, "rho": str(Fraction(rho))}


def high_frequency_check(geom: TorusGeom, N: int, rho, g: dict | None = None, tol: float = 1e-10) -> Report:
    """G_hat(k) <= 1/eps(k) for every k != o."""
    G, _, _ = g_arrays(geom, N, rho, g)
    gh = dft(geom, G, "G").real()
    eps = epsilon(dual_points(geom))
    wit = []
    worst = np.inf
    for s in range(geom.n):
        if s == geom.origin:
            continue
        margin = 1 / eps[s] - gh[s]
        worst = min(worst, margin)
        if margin < -tol:
            wit.append({"k": list(geom.coords(s)), "G_hat": gh[s], "bound": 1 / eps[s]})
    return Report("hf", _params(geom, N, rho), not wit, wit, {"min_margin": float(worst), "modes": geom.n - 1})


def shift_by_pi(geom: TorusGeom, s: int, u) -> int:
    """Index of k + pi u."""
    half = geom.L // 2
    return geom.site_index([c + half * ui for c, ui in zip(geom.coords(s), u)])


def parity_symmetry_check(geom: TorusGeom, N: int, rho, g: dict | None = None, tol: float = 1e-10) -> Report:
    """G_hat^o(k + pi u) = -G_hat^o(k), G_hat^e(k + pi u) = G_hat^e(k); all transforms real."""
    require_even_L(geom.L)
    G, Go, Ge = g_arrays(geom, N, rho, g)
    wit = []
    specs = {}
    for tag, f in (("G", G), ("Go", Go), ("Ge", Ge)):
        sp = dft(geom, f, tag)
        resid = float(np.max(np.abs(sp.values.imag)))
        if resid > IMAG_TOL:
            wit.append({"real": tag, "residue": resid})
        specs[tag] = sp.values.real
    worst = 0.0
    for u in product((1, -1), repeat=geom.d):
        for s in range(geom.n):
            t = shift_by_pi(geom, s, u)
            do = abs(specs["Go"][t] + specs["Go"][s])
            de = abs(specs["Ge"][t] - specs["Ge"][s])
            worst = max(worst, do, de)
            if do > tol or de > tol:
                wit.append({"k": list(geom.coords(s)), "u": list(u), "odd_gap": do, "even_gap": de})
    return Report("parity", _params(geom, N, rho), not wit, wit[:10], {"max_gap": worst})


def mode_difference_identity(geom: TorusGeom, N: int, rho, g: dict | None = None, tol: float = 1e-10,
                             G: np.ndarray | None = None) -> Report:
    """(2/|T|) sum_{x odd} G(x) = G(e1) - |T|^(-1) sum_{k not in {o,p}} exp(i k.e1) G_hat(k)."""
    if G is None:
        G, _, _ = g_arrays(geom, N, rho, g)
    n = geom.n
    odd = geom.parity_array.astype(bool)
    lhs = 2 / n * G[odd].sum()
    gh = dft(geom, G).values
    ks = dual_points(geom)
    keep = np.ones(n, dtype=bool)
    keep[geom.origin] = False
    keep[mode_p(geom)] = False
    e1 = geom.unit(1)
    tail = np.sum(np.exp(1j * ks[keep, 0]) * gh[keep]) / n
    rhs = G[e1] - tail
    gap = abs(lhs - rhs)
    ok = bool(gap <= tol)
    return Report("modediff", _params(geom, N, rho), ok,
                  [] if ok else [{"lhs": float(lhs), "rhs": repr(complex(rhs))}],
                  {"lhs": float(lhs), "rhs_re": float(rhs.real), "rhs_im": float(rhs.imag), "gap": float(gap)})


# the half-space H, I_L and Upsilon -----------------------------------------------

def in_H(geom: TorusGeom) -> np.ndarray:
    """k_1 in (-pi/2, pi/2], decided on integer coordinates: -L/4 < n_1 <= L/4."""
    n1 = geom.coord_array[:, 0].astype(np.int64)
    return (4 * n1 > -geom.L) & (4 * n1 <= geom.L)


def i_l(d: int, L: int) -> float:
    """(1/2d) |T|^(-1) sum_{k in H, k != o} 2 cos k_1 / (1 - (1/d) sum_i cos k_i)."""
    require_even_L(L)
    n = np.arange(-L // 2 + 1, L // 2 + 1)
    k = 2 * np.pi * n / L
    h1 = (4 * n > -L) & (4 * n <= L)
    c1 = np.cos(k[h1])
    # sum over the remaining coordinates of cos terms, accumulated without a d-dim grid when possible
    rest = np.zeros(1)
    for _ in range(d - 1):
        rest = (rest[:, None] + np.cos(k)[None, :]).ravel()
    den = 1 - (c1[:, None] + rest[None, :]) / d
    num = 2 * np.repeat(c1[:, None], rest.size, axis=1)
    zero = np.isclose(den, 0.0, atol=0.0)
    # only k = o makes the denominator vanish
    num[zero] = 0.0
    den[zero] = 1.0
    return float(np.sum(num / den) / (2 * d) / L ** d)


def upsilon_complex(d: int, L: int) -> np.ndarray:
    """(2/|T|) sum_{k in H} exp(-i k.(x - e1)) for every site x (site order)."""
    geom = TorusGeom(d, L)
    ks = dual_points(geom)[in_H(geom)]
    c = geom.coord_array.astype(float).copy()
    c[:, 0] -= 1
    # factorizes: coordinates 2..d sum over the full dual circle
    out = np.empty(geom.n, dtype=complex)
    k1 = np.unique(ks[:, 0])
    for s in range(geom.n):
        first = np.sum(np.exp(-1j * k1 * c[s, 0]))
        others = 1.0
        for i in range(1, d):
            others *= L if int(round(c[s, i])) % L == 0 else 0
        out[s] = 2 / geom.n * first * others
    return out


def upsilon_direct(d: int, L: int) -> np.ndarray:
    """Same as `upsilon_complex` by brute-force summation over H (oracle)."""
    geom = TorusGeom(d, L)
    ks = dual_points(geom)[in_H(geom)]
    c = geom.coord_array.astype(float).copy()
    c[:, 0] -= 1
    return 2 / geom.n * np.exp(-1j * c @ ks.T).sum(axis=1)


def upsilon_l(d: int, L: int) -> np.ndarray:
    """Real part of Upsilon_L over sites; the imaginary part cancels against real G^e."""
    return upsilon_complex(d, L).real


# Psi symmetrisation -------------------------------------------------------------

def h_block(geom: TorusGeom, s: int) -> tuple:
    """Block label b of a dual point; b_1 in {-1, -1/2, 1/2, 1}, b_i in {0, 1}."""
    L = geom.L
    c = geom.coords(s)
    n1 = c[0]
    # quarter turns: (-pi,-pi/2] -> -1, (-pi/2,0] -> -1/2, (0,pi/2] -> 1/2, (pi/2,pi] -> 1
    if 4 * n1 <= -L:
        b1 = Fraction(-1)
    elif n1 <= 0:
        b1 = Fraction(-1, 2)
    elif 4 * n1 <= L:
        b1 = Fraction(1, 2)
    else:
        b1 = Fraction(1)
    return (b1,) + tuple(0 if ci <= 0 else 1 for ci in c[1:])


def psi(geom: TorusGeom, s: int) -> int:
    """Psi(k) = k + pi u with u fixed by the block of k (k in H, k != o)."""
    b = h_block(geom, s)
    if abs(b[0]) != Fraction(1, 2):
        raise ValueError("Psi is defined on H only")
    u = [-1 if b[0] > 0 else 1] + [1 if bi == 0 else -1 for bi in b[1:]]
    return shift_by_pi(geom, s, u)


def psi_symmetrisation_check(geom: TorusGeom, N: int | None = None, rho=0, g: dict | None = None,
                             tol: float = 1e-10) -> Report:
    """Psi: H minus o -> T* minus (H and p) is a bijection flipping cos k_1, G_hat^o and fixing G_hat^e."""
    require_even_L(geom.L)
    H = in_H(geom)
    o, p = geom.origin, mode_p(geom)
    dom = [s for s in range(geom.n) if H[s] and s != o]
    img = [psi(geom, s) for s in dom]
    target = {s for s in range(geom.n) if not H[s] and s != p}
    wit = []
    if len(set(img)) != len(img):
        wit.append({"bijective": "not injective"})
    if set(img) != target:
        wit.append({"bijective": "image mismatch", "missing": len(target - set(img)), "extra": len(set(img) - target)})
    ks = dual_points(geom)
    flips = [s for s, t in zip(dom, img) if abs(np.cos(ks[s, 0]) + np.cos(ks[t, 0])) > 1e-12]
    if flips:
        wit.append({"cos_flip": [list(geom.coords(s)) for s in flips[:5]]})
    blocks = {",".join(str(b) for b in h_block(geom, s)) for s in range(geom.n)}
    details = {"domain": len(dom), "blocks": sorted(blocks)}
    if N is not None:
        _, Go, Ge = g_arrays(geom, N, rho, g)
        so, se = dft(geom, Go).real(), dft(geom, Ge).real()
        gaps = [max(abs(so[s] + so[t]), abs(se[s] - se[t])) for s, t in zip(dom, img)]
        details["max_gap"] = float(max(gaps, default=0.0))
        if details["max_gap"] > tol:
            wit.append({"spectral_gap": details["max_gap"]})
    params = {"d": geom.d, "L": geom.L}
    if N is not None:
        params.update({"N": N, "rho": str(Fraction(rho))})
    return Report("psi", params, not wit, wit, details)


# infrared bound ---------------------------------------------------------------------

def infrared_check(geom: TorusGeom, N: int, rho, g: dict | None = None, tol: float = 1e-9) -> Report:
    """sum_{x odd} G^o/|T^o| >= G(e1) - I_L - sum_x G^e/|T^e| + sum_{x on e1 axis} Upsilon_L(x) G^e(x)."""
    require_even_L(geom.L)
    G, Go, Ge = g_arrays(geom, N, rho, g)
    half = geom.n // 2
    lhs = Go.sum() / half
    il = i_l(geom.d, geom.L)
    ups = upsilon_l(geom.d, geom.L)
    axis = np.array([geom.on_axis(s, 1) for s in range(geom.n)])
    ups_term = float(np.sum(ups[axis] * Ge[axis]))
    rhs = G[geom.unit(1)] - il - Ge.sum() / half + ups_term
    ok = bool(lhs >= rhs - tol)
    det = {"lhs": float(lhs), "rhs": float(rhs), "I_L": il, "even_mass": float(Ge.sum() / half),
           "upsilon_term": ups_term, "margin": float(lhs - rhs)}
    return Report("infrared", _params(geom, N, rho), ok, [] if ok else [det], det)


# cosine test vectors --------------------------------------------------------------

def cosine_vector(geom: TorusGeom, s: int) -> np.ndarray:
    k = dual_points(geom)[s]
    return np.cos(geom.coord_array @ k)


def appendix_identities(geom: TorusGeom, s: int, G: np.ndarray) -> dict:
    """Residuals of the three cosine identities at dual point s for a translation-invariant G."""
    from .pathweb import laplacian
    v = cosine_vector(geom, s)
    eps = float(epsilon(dual_points(geom)[s]))
    lap = np.array(laplacian(geom, list(v)))
    v2 = float(v @ v)
    edges = sum((v[b] - v[a]) ** 2 for a, b in geom.edges)
    Gm = G[geom.diff_table]
    gh = dft(geom, G).values[s].real
    return {
        "laplacian": float(np.max(np.abs(lap + eps * v))),
        "dirichlet": abs(edges - eps * v2),
        "quadratic": abs(float(v @ Gm @ v) - gh * v2),
    }
