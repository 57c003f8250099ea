"""Numerical checks of the summation formulas used by the moment computation.

Each check evaluates both sides of an identity independently and returns
the discrepancy together with whatever truncation information is needed to
judge it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import jv

from .eigenforms import dim_cusp, hecke_basis, petersson_offdiagonal
from .numerics import SmoothBump, integrate
from .specialfn import ArithmeticTable, bessel_imag_order, divisors, eta, eta_table, zeta

# ---------------------------------------------------------------------------
# Petersson


@dataclass
class PeterssonResult:
    k: int
    m: int
    n: int
    lhs: float
    rhs: float
    residual: float
    tail: float
    weight_pairs: tuple


def _weight_pairs(d: int, exclude: tuple[int, int]) -> list[tuple[int, int]]:
    ex = tuple(sorted(exclude))
    if d == 1:
        return [(2, 2)] if ex == (1, 1) else [(1, 1)]
    return [(a, b) for a in range(1, d + 4) for b in range(a, d + 4) if (a, b) != ex]


def petersson_check(k: int, m: int, n: int, tol: float = 1e-13) -> PeterssonResult:
    """Both sides of the Petersson formula at (m, n).

    The harmonic weights on the left are solved from other (m', n') pairs,
    so the pair being checked plays no part in them.
    """
    if m > 50 or n > 50:
        raise ValueError("m, n must be <= 50")
    d = dim_cusp(k)
    forms = hecke_basis(k, max(2 * d + 8, 64), with_weights=False)
    pairs = _weight_pairs(d, (m, n))
    A = np.array([[f.lam[a] * f.lam[b] for f in forms] for a, b in pairs])
    b = np.array([(1.0 if a == bb else 0.0) + petersson_offdiagonal(k, a, bb, tol)[0] for a, bb in pairs])
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    lhs = float(sum(om * f.lam[m] * f.lam[n] for om, f in zip(w, forms)))
    off, tail = petersson_offdiagonal(k, m, n, tol)
    rhs = (1.0 if m == n else 0.0) + off
    return PeterssonResult(k, m, n, lhs, rhs, abs(lhs - rhs), tail, tuple(pairs))


# ---------------------------------------------------------------------------
# weight average of J-Bessel functions


@lru_cache(maxsize=8)
def _third_moment(lo: float, hi: float, sharpness: float, vmax: float = 150.0) -> float:
    """int |v|^3 |hat Phi(v)| dv for a bump (even in v since Phi is real)."""
    bump = SmoothBump(lo, hi, sharpness)
    v = np.linspace(0.0, vmax, int(20 * vmax) + 1)
    F = np.array([abs(bump.fourier(x)) for x in v])
    if F[-1] * vmax ** 3 > 1e-6 * np.max(F * v ** 3):
        raise ArithmeticError("hat Phi has not decayed by the end of the grid")
    return float(2 * np.trapezoid(v ** 3 * F, v))


@dataclass
class BesselAverageResult:
    K: float
    x: float
    lhs: float
    rhs: float
    error: float
    scaled_error: float
    terms: int


def bessel_average_check(K: float, x: float, Phi: SmoothBump | None = None) -> BesselAverageResult:
    """4 sum_{k = 2 (4)} Phi((k-1)/K) J_{k-1}(x) against its two main terms.

    The scaled error is |LHS - RHS| K^3 / (x int |v|^3 |hat Phi|).
    """
    Phi = Phi if Phi is not None else SmoothBump()
    if not 20 <= K <= 400:
        raise ValueError("K must lie in [20, 400]")
    ks = np.arange(2, int(math.ceil(Phi.hi * K)) + 6, 4)
    ks = ks[((ks - 1) / K > Phi.lo) & ((ks - 1) / K < Phi.hi)]
    terms = 4 * Phi((ks - 1) / K) * jv(ks - 1, x)
    # drop the terms below 1e-16 at the small-argument end, they do not move the sum
    keep = np.abs(terms) >= 1e-16 * max(1.0, np.max(np.abs(terms)))
    lhs = float(np.sum(terms[keep]))
    osc = K / math.sqrt(x) * (np.exp(-0.25j * math.pi + 1j * x) * Phi.check(K * K / (2 * x))).imag
    rhs = float(Phi(x / K) + osc)
    err = abs(lhs - rhs)
    scaled = err * K ** 3 / (x * _third_moment(Phi.lo, Phi.hi, Phi.sharpness))
    return BesselAverageResult(K, x, lhs, rhs, err, scaled, int(keep.sum()))


def bessel_average_slope(ratio: float = 1.6, Ks=(50, 100, 200, 400), Phi: SmoothBump | None = None) -> float:
    """Fitted log-log slope of the error in K at fixed x/K."""
    errs = [bessel_average_check(K, ratio * K, Phi).error for K in Ks]
    return float(np.polyfit(np.log(Ks), np.log(errs), 1)[0])


# ---------------------------------------------------------------------------
# Voronoi for eta_{it}


def voronoi_bump(lo: float, hi: float) -> SmoothBump:
    """Bump on [lo, hi] with peak e^{-6}; the sharpness grows with the width so
    its transforms decay quickly (few dual terms)."""
    return SmoothBump(lo, hi, sharpness=1.5 * (hi - lo) ** 2)


def _gl(a, b, panels, nodes=20):
    x, w = np.polynomial.legendre.leggauss(nodes)
    e = np.linspace(a, b, panels + 1)
    h = 0.5 * np.diff(e)
    m = e[:-1] + h
    return (m[:, None] + h[:, None] * x).ravel(), (h[:, None] * w).ravel()


@dataclass
class VoronoiResult:
    lhs: complex
    rhs: complex
    residual: float
    main: complex
    dual_terms: int
    last_term: float


def voronoi_check(t: float, a: int, c: int, g: SmoothBump | None = None,
                  threshold: float = 1e-14, max_terms: int = 200000) -> VoronoiResult:
    """sum eta_{it}(n) g(n) e(an/c) against the zeta main terms plus the dual sums.

    The dual sum stops after a run of consecutive terms below ``threshold``
    (the run length grows with n so accidental small terms do not stop it).
    """
    g = g if g is not None else voronoi_bump(5.0, 20.0)
    if math.gcd(a, c) != 1:
        raise ValueError("need (a, c) = 1")
    if not 0.05 <= abs(t) <= 2:
        raise ValueError("|t| must lie in [0.05, 2]")
    if g.lo < 1 or g.hi > 40:
        raise ValueError("g must be supported in [1, 40]")
    d = pow(a, -1, c) if c > 1 else 1
    lo, hi = g.lo, g.hi
    n = np.arange(math.ceil(lo), math.floor(hi) + 1)
    et = eta_table(1j * t, int(hi) + 1).real
    lhs = complex(np.sum(et[n] * g(n) * np.exp(2j * math.pi * a * n / c)))

    gi_minus = integrate(lambda x: g(x) * x ** (-1j * t), lo, hi, tol=1e-14, tol_abs=1e-17).value
    gi_plus = integrate(lambda x: g(x) * x ** (1j * t), lo, hi, tol=1e-14, tol_abs=1e-17).value
    main = (c ** (2j * t - 1) * complex(zeta(1 - 2j * t)) * gi_minus
            + c ** (-2j * t - 1) * complex(zeta(1 + 2j * t)) * gi_plus)

    size = 4096
    E = eta_table(1j * t, size).real
    dual = []
    small = 0
    m = 0
    term = 0.0
    while True:
        m += 1
        if m >= size:
            size *= 2
            E = eta_table(1j * t, size).real
        phase = 4 * math.pi * math.sqrt(m) * (math.sqrt(hi) - math.sqrt(lo)) / c
        x, w = _gl(lo, hi, int(phase / (2 * math.pi)) + 16)
        jp, kp = bessel_imag_order(t, 4 * math.pi * np.sqrt(m * x) / c)
        gx = g(x) * w
        term = E[m] * (np.exp(-2j * math.pi * d * m / c) * np.dot(gx, jp)
                       + np.exp(2j * math.pi * d * m / c) * np.dot(gx, kp)) / c
        dual.append(term)
        small = small + 1 if abs(term) < threshold else 0
        if small > max(20, m // 10):
            break
        if m > max_terms:
            raise RuntimeError("dual sum did not fall below the threshold")
    # sum small terms first
    dual_sum = complex(np.sum(np.array(dual)[::-1]))
    rhs = main + dual_sum
    return VoronoiResult(lhs, rhs, abs(lhs - rhs), main, m, float(abs(term)))


# ---------------------------------------------------------------------------
# Dirichlet series in c and d


@dataclass
class DirichletResult:
    value: complex
    closed_form: complex
    residual: float
    tail_bound: float


def ramanujan_sums(ell: int, C: int) -> np.ndarray:
    """c_c(ell) = S(0, ell; c) for 1 <= c <= C (index 0 unused)."""
    mu = ArithmeticTable(C).mu
    out = np.zeros(C + 1)
    for e in divisors(ell):
        cs = np.arange(e, C + 1, e)
        out[cs] += e * mu[cs // e]
    return out


def dirichlet_identity_check(ell: int | None, s: complex, c_max: int = 1000, d_max: int = 1000) -> DirichletResult:
    """Truncated double sum over c, d against its closed form.

    ell given: sum S(0, ell; c) c^{-1-2s} d^{-1-2s} = ell^{-s} eta_s(ell);
    ell None:  sum phi(c) c^{-1-2s} d^{-1-2s} = zeta(2s).
    The tail bound covers both omitted ranges.
    """
    s = complex(s)
    sig = s.real
    if sig < 0.75:
        raise ValueError("need Re s >= 0.75")
    if c_max < 1000 or d_max < 1000:
        raise ValueError("c_max and d_max must be >= 1000")
    c = np.arange(1, c_max + 1)
    dd = np.arange(1, d_max + 1)
    Sd = complex(np.sum((dd.astype(float) ** (-1 - 2 * s))[::-1]))
    Rd = d_max ** (-2 * sig) / (2 * sig)
    if ell is None:
        coef = ArithmeticTable(c_max).phi[1:].astype(float)
        closed = complex(zeta(2 * s))
        # phi(c) <= c
        Rc = c_max ** (1 - 2 * sig) / (2 * sig - 1)
    else:
        coef = ramanujan_sums(ell, c_max)[1:]
        closed = complex(ell ** (-s) * eta(s, ell))
        # |c_c(ell)| <= sigma(ell)
        Rc = sum(divisors(ell)) * c_max ** (-2 * sig) / (2 * sig)
    Sc = complex(np.sum((coef * c.astype(float) ** (-1 - 2 * s))[::-1]))
    value = Sc * Sd
    tail = Rc * (abs(Sd) + Rd) + abs(Sc) * Rd
    return DirichletResult(value, closed, abs(value - closed), float(tail))
