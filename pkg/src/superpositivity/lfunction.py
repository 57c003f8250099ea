"""Completed L-functions of level-one eigenforms.

Lambda(s) is evaluated from the Mellin integral of f(iy) split at y = A:

    Lambda(s) = int_A^inf f(iy) y^{s'-1} dy + eps int_{1/A}^inf f(iy) y^{k-s'-1} dy,
    s' = s + (k-1)/2,

which for A = 1 is term by term the usual incomplete-Gamma series
sum a(n) [(2 pi n)^{-s'} Gamma(s', 2 pi n) + eps (2 pi n)^{s'-k} Gamma(k-s', 2 pi n)].
Off the real axis both integrals run along the rays y = r e^{+-i phi}, with phi
near the saddle direction arg(s'); this removes the e^{-pi |Im s|/2}
cancellation and keeps the relative accuracy uniform up to height 50.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .numerics import integrate
from .specialfn import eta_table, loggamma, mellin_h

_LOG2PI = math.log(2 * math.pi)
_PHI_STEP = 0.01


class CoefficientShortfall(ValueError):
    """The form does not carry enough coefficients for the requested accuracy."""


def _phi_for(T, k):
    # saddle direction of Gamma(s + (k-1)/2): arg of s' ~ atan(T / (k/2))
    T = np.asarray(T, dtype=float)
    mag = np.arctan(np.abs(T) / (0.5 * k))
    mag = np.floor(mag / _PHI_STEP) * _PHI_STEP
    return np.sign(T) * mag


class CompletedLFunction:
    """Lambda(s, f) = (2 pi)^{-s'} Gamma(s') L(s, f) with s' = s + (k-1)/2.

    Normalized so that Lambda(s) = eps Lambda(1 - s), eps = i^k.
    """

    def __init__(self, form, tol: float = 1e-13, tail_level: float = 1e-20, split: float = 1.0):
        self.form = form
        # the Mellin integral is cut at y = split; any positive value gives the
        # same function, so two splits cross-check each other
        if not 0.5 <= split <= 2.0:
            raise ValueError("split must lie in [1/2, 2]")
        self.split = float(split)
        self._lo = min(self.split, 1 / self.split)
        self.tail_level = tail_level
        self.k = form.weight
        self.epsilon = form.epsilon
        self.tol = tol
        n = np.arange(1, form.N, dtype=float)
        lam = np.asarray(form.lam[1:], dtype=float)
        keep = lam != 0
        self._n = n[keep]
        self._sign = np.sign(lam[keep])
        self._logabs = np.log(np.abs(lam[keep])) + 0.5 * (self.k - 1) * np.log(self._n)

    # -- pieces ------------------------------------------------------------

    def gamma_factor(self, s):
        sp = np.asarray(s, dtype=complex) + 0.5 * (self.k - 1)
        out = np.exp(loggamma(sp) - sp * _LOG2PI)
        return complex(out) if np.ndim(out) == 0 else out

    def series_length(self, phi: float = 0.0, sigma_max: float | None = None) -> int:
        """Number of terms so the neglected tail is below ``tail_level``.

        Uses |lambda(n)| <= tau(n) <= n and the incomplete-Gamma bound
        int_1^inf e^{-x r} r^{a} dr <= e^{-x}/(x - a) for x > a, summed as a
        geometric series once the terms decrease.
        """
        k = self.k
        a = max(0.0, (sigma_max if sigma_max is not None else k) - 1)
        c = 2 * math.pi * math.cos(phi) * self._lo
        target = math.log(self.tail_level)
        n = int(a / c) + 2
        while True:
            x = c * n
            logterm = 0.5 * (k + 1) * math.log(n) - x - math.log(x - a)
            ratio = math.exp(0.5 * (k + 1) * math.log1p(1 / n) - c)
            if ratio < 1 and logterm - math.log1p(-ratio) < target:
                return n
            n += 1
            if n > 10 ** 6:
                raise RuntimeError("series length search failed")

    def _upper_limit(self, phi, sigma_max):
        # integrand ~ e^{-2 pi r cos phi} r^{sigma_max - 1}; run until it is < e^{-45} of its start
        c = 2 * math.pi * math.cos(phi)
        a = max(0.0, sigma_max - 1)
        R = 2.0 * self._lo
        while c * (R - 1) - a * math.log(R) < 48:
            R *= 1.25
        return R

    # -- evaluation ----------------------------------------------------------

    def _rounding_floor(self, n, la, phi, sigma, R):
        # F is a sum with internal cancellation; its rounding error is set by
        # the absolute term sum, integrated against the (scaled) power of r
        r = np.linspace(self._lo, R, 4001)
        absF = np.exp(la[None, :] - 2 * np.pi * math.cos(phi) * np.outer(r, n)).sum(axis=1)
        pw = r[:, None] ** (sigma[None, :] - 1) + r[:, None] ** (self.k - sigma[None, :] - 1)
        mass = np.trapezoid(absF[:, None] * pw, r, axis=0)
        return float(200 * np.finfo(float).eps * mass.max())

    def _lambda_batch(self, s: np.ndarray, phi: float) -> np.ndarray:
        k = self.k
        sp = s + 0.5 * (k - 1)
        T = sp.imag
        sigma_max = float(max(np.max(sp.real), np.max(k - sp.real)))
        N = self.series_length(phi, sigma_max)
        if N > self._n[-1] + 1:
            raise CoefficientShortfall(f"need {N} coefficients for weight {k} at phi={phi:.2f}; form has {self.form.N}")
        take = self._n <= N
        n, sgn, la = self._n[take], self._sign[take], self._logabs[take]
        e_p, e_m = np.exp(1j * phi), np.exp(-1j * phi)
        # column scaling by e^{T phi} keeps every column of order one
        scale = np.exp(T * phi)
        ep_exp = sp - 1
        em_exp = k - sp - 1
        eps = self.epsilon

        A1, A2 = self.split, 1 / self.split

        def integrand(r):
            yp = r * e_p
            ym = r * e_m
            Fp = np.exp(la[None, :] - 2 * np.pi * np.outer(yp, n)) @ sgn
            Fm = Fp if phi == 0 else np.exp(la[None, :] - 2 * np.pi * np.outer(ym, n)) @ sgn
            logr = np.log(r)[:, None]
            part1 = Fp[:, None] * np.exp(ep_exp[None, :] * (logr + 1j * phi)) * e_p
            part2 = Fm[:, None] * np.exp(em_exp[None, :] * (logr - 1j * phi)) * e_m
            out = part1 * (r >= A1)[:, None] + eps * part2 * (r >= A2)[:, None]
            return out * scale[None, :]

        R = self._upper_limit(phi, sigma_max)
        res = integrate(integrand, self._lo, R, tol=self.tol, points=[1 / self._lo],
                        tol_abs=self._rounding_floor(n, la, phi, sp.real, R),
                        initial_panels=max(4, int(R)))
        return np.asarray(res.value).reshape(-1) / scale

    def __call__(self, s):
        return self.Lambda(s)

    def Lambda(self, s):
        """Completed L-function at complex s (scalar or array)."""
        sa = np.atleast_1d(np.asarray(s, dtype=complex)).ravel()
        if np.any(np.abs(sa.imag) > 50.5):
            raise ValueError("supported height is |Im s| <= 50")
        out = np.empty(sa.size, dtype=complex)
        phis = _phi_for(sa.imag, self.k)
        for phi in np.unique(phis):
            sel = phis == phi
            out[sel] = self._lambda_batch(sa[sel], float(phi))
        if np.ndim(s) == 0:
            return complex(out[0])
        return out.reshape(np.shape(s))

    def L(self, s):
        """L(s, f) = Lambda(s)/gamma_factor(s)."""
        return self.Lambda(s) / self.gamma_factor(s)

    # -- derivatives ---------------------------------------------------------

    def cauchy_derivatives(self, center: complex, max_order: int, radius: float, nodes: int = 256):
        return cauchy_derivatives(self.Lambda, center, max_order, radius, nodes)


def cauchy_derivatives(func, center: complex, max_order: int, radius: float, nodes: int = 256):
    """Taylor derivatives at ``center`` from one circle; returns (derivs, rounding floor)."""
    radius = float(radius)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.asarray(func(center + radius * np.exp(1j * theta)), dtype=complex)
    coeffs = np.fft.fft(vals) / nodes          # c_j r^j
    j = np.arange(max_order + 1)
    fact = np.array([math.factorial(int(i)) for i in j], dtype=float)
    derivs = coeffs[:max_order + 1] * fact / radius ** j
    floor = 4e-16 * np.max(np.abs(vals)) * fact / radius ** j
    return derivs, floor


@dataclass
class DerivativeTable:
    center: complex
    values: np.ndarray
    error_estimate: np.ndarray
    radii: tuple

    def to_json(self) -> str:
        rows = [{"order": int(j), "value": [float(v.real), float(v.imag)],
                 "error_estimate": float(e)} for j, (v, e) in enumerate(zip(self.values, self.error_estimate))]
        return json.dumps({"center": [self.center.real, self.center.imag], "radii": list(self.radii),
                           "derivatives": rows}, indent=1)


class DerivativeMismatch(RuntimeError):
    pass


RADIUS_LADDER = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


def default_radii(max_order: int) -> tuple:
    """Cauchy radii tried for derivatives up to ``max_order``.

    Rounding is amplified by j!/r^j, so high orders want wide circles while
    the growth of Lambda off the line limits how wide is useful.  Each order
    is read from the radius with the smallest floor.
    """
    top = 4.0 if max_order <= 6 else 8.0
    return tuple(r for r in RADIUS_LADDER if r <= top)


def lambda_derivatives(L, center: complex = 0.5, max_order: int = 12,
                       radii: tuple | None = None, nodes: int = 256,
                       rel_tol: float = 1e-8, abs_tol: float = 1e-14) -> DerivativeTable:
    """Lambda^{(j)}(center) for j <= max_order from Cauchy circles.

    ``L`` is anything with a vectorized ``Lambda`` method.

    Order j is taken from the radius with the smallest rounding floor and
    checked against the next radius in the list (the previous one for the
    last): they must agree to ``rel_tol`` relative, or to the larger of
    ``abs_tol`` and the combined rounding floor in absolute terms.
    """
    if max_order > 24:
        raise ValueError("max_order must be <= 24")
    radii = tuple(sorted(radii)) if radii is not None else default_radii(max_order)
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    tables = [cauchy_derivatives(L.Lambda, center, max_order, r, nodes) for r in radii]
    D = np.array([t[0] for t in tables])
    F = np.array([t[1] for t in tables])
    best = np.argmin(F, axis=0)
    other = np.where(best + 1 < len(radii), best + 1, best - 1)
    j = np.arange(max_order + 1)
    d1, d2 = D[best, j], D[other, j]
    f1, f2 = F[best, j], F[other, j]
    diff = np.abs(d1 - d2)
    floor = np.maximum(abs_tol, 10 * (f1 + f2))
    ok = (diff <= rel_tol * np.abs(d1)) | (diff <= floor)
    if not ok.all():
        bad = int(np.argmin(ok))
        raise DerivativeMismatch(f"order {bad}: radii {radii[best[bad]]}, {radii[other[bad]]} "
                                 f"disagree by {diff[bad]:.3e}")
    err = np.maximum(np.minimum(diff, floor), f1)
    return DerivativeTable(complex(center), d1, err, tuple(float(radii[b]) for b in best))


# ---------------------------------------------------------------------------
# approximate functional equation weight


class AfeWeight:
    """V_{k, delta+it}(y) by quadrature on the line Re s = 3.

    The line integral runs over |Im s| <= ``height``, on a fixed composite
    Gauss-Legendre grid; the omitted part is checked to be negligible.
    """

    def __init__(self, k: int, delta: float, t: float, height: float = 60.0, sigma: float = 3.0,
                 panel: float = 0.25):
        self.k, self.delta, self.t = k, float(delta), float(t)
        x0, w0 = np.polynomial.legendre.leggauss(16)
        edges = np.arange(-height, height + 1e-12, panel)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        tau = (mid[:, None] + half[:, None] * x0).ravel()
        w = (half[:, None] * w0).ravel()
        s = sigma + 1j * tau
        d, tt, hk = self.delta, self.t, k / 2
        hs = mellin_h(np.concatenate([s + d, s - d]))
        hsum = hs[:s.size] + hs[s.size:]
        lg = (loggamma(s + hk + 1j * tt) + loggamma(s + hk - 1j * tt)
              - loggamma(d + hk + 1j * tt) - loggamma(d + hk - 1j * tt))
        self._s_shift = s - d                   # exponent of (4 pi^2 y)^{-1}
        self._h = hsum * np.exp(lg) * w / (2 * np.pi)
        edge = np.abs(self._h[[0, -1]]).max() / max(np.abs(self._h).max(), 1e-300)
        if edge > 1e-15:
            raise ValueError(f"AFE line truncation too short (edge ratio {edge:.1e})")

    def __call__(self, y, derivative: bool = False):
        ya = np.atleast_1d(np.asarray(y, dtype=float))
        if np.any(ya < 0.1):
            # the Re s = 3 line amplifies its truncation error by (4 pi^2 y)^{-3}
            raise ValueError("V is evaluated for y >= 0.1 only")
        out = np.empty(ya.size)
        for lo in range(0, ya.size, 512):
            chunk = ya[lo:lo + 512]
            L = np.log(4 * np.pi ** 2 * chunk)
            kern = np.exp(-np.outer(L, self._s_shift))
            h = self._h * (-self._s_shift) if derivative else self._h
            val = kern @ h
            if np.max(np.abs(val.imag)) > 1e-9 * max(1.0, np.max(np.abs(val.real))):
                raise ArithmeticError("V has a non-negligible imaginary part")
            out[lo:lo + 512] = val.real
        return float(out[0]) if np.ndim(y) == 0 else out.reshape(np.shape(y))


def afe_weight(k: int, delta: float, t: float, y):
    """V_{k,delta+it}(y)."""
    return AfeWeight(k, delta, t)(y)


def afe_cutoff(V: AfeWeight, k: int, level: float = 1e-17, ceiling: float | None = None) -> float:
    """Smallest y on a log grid beyond which |V| stays below ``level``."""
    ceiling = ceiling if ceiling is not None else 40.0 * k * k
    grid = np.geomspace(1.0, ceiling, 400)
    vals = np.abs(V(grid))
    above = np.nonzero(vals >= level)[0]
    if above.size == 0:
        return 1.0
    i = above[-1]
    if i == grid.size - 1:
        return ceiling
    return float(grid[i + 1])


def l_squared_afe(form, delta: float, t: float, V: AfeWeight | None = None) -> float:
    """|L(1/2+delta+it, f)|^2 from the approximate functional equation.

    The double sum over (n, d) runs over n d^2 <= Y with Y the point where
    |V| falls below 1e-17 (never beyond 40 k^2).
    """
    k = form.weight
    V = V if V is not None else AfeWeight(k, delta, t)
    Y = afe_cutoff(V, k)
    nmax = int(Y)
    if nmax >= form.N:
        raise CoefficientShortfall(f"AFE needs n up to {nmax}; form has {form.N - 1}")
    n = np.arange(1, nmax + 1)
    eta = eta_table(1j * t, nmax)[1:]
    base = form.lam[1:nmax + 1] * eta * n ** (-0.5 - delta)
    total = 0.0 + 0.0j
    for d in range(1, int(math.isqrt(nmax)) + 1):
        m = nmax // (d * d)
        total += d ** (-1 - 2 * delta) * np.dot(base[:m], V(n[:m] * float(d * d)))
    return float(total.real)


def l_squared_direct(L: CompletedLFunction, delta: float, t: float) -> float:
    """|L(1/2+delta+it)|^2 from the completed L-function."""
    return abs(L.L(0.5 + delta + 1j * t)) ** 2
