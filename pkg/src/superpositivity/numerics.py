"""Deterministic numeric kernel shared by every other module.

Adaptive Gauss-Kronrod quadrature (finite and semi-infinite), contour phase
tracking for winding numbers, and the smooth bump test function with its two
Fourier-type transforms.

Error estimates produced here are heuristic (nested-rule differences), not
rigorous enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss rule.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full symmetric node set on [-1, 1] (15 points) and weights.
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[9, 11, 13]] = _WG[2::-1]
_GWEIGHTS[7] = _WG[3]


class QuadratureError(RuntimeError):
    """Raised when a quadrature cannot reach its tolerance.

    ``partial`` holds the best estimate available at the time of failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ContourTooCloseError(RuntimeError):
    """The function nearly vanishes on the contour; move the contour."""


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float | np.ndarray
    error_estimate: float
    panels_used: int
    tail_bound: float = 0.0

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


def _as_2d(values, n):
    values = np.asarray(values)
    if values.ndim == 0:
        values = np.full(n, values)
    return values.reshape(n, -1)


_BATCH = 15 * 256


def _gk_panels(f, lo, hi):
    """Evaluate the 15-point rule on a batch of panels.

    Returns Kronrod sums, Gauss sums (shape (panels, m)) and the panel L1 mass.
    """
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    # bounded batches keep the memory of wide integrands in check
    fx = np.concatenate([_as_2d(f(x[i:i + _BATCH]), x[i:i + _BATCH].size)
                         for i in range(0, x.size, _BATCH)])
    if not np.all(np.isfinite(fx)):
        bad = x[~np.all(np.isfinite(fx), axis=1)][0]
        raise QuadratureError(f"integrand is not finite at x = {bad!r}")
    fx = fx.reshape(lo.size, 15, -1)
    kron = np.einsum("pnm,n->pm", fx, _KWEIGHTS) * half[:, None]
    gauss = np.einsum("pnm,n->pm", fx, _GWEIGHTS) * half[:, None]
    l1 = np.einsum("pnm,n->p", np.abs(fx), _KWEIGHTS) * half
    return kron, gauss, l1


def integrate(f: Callable, a: float, b: float, tol: float = 1e-10, tol_abs: float = 1e-300,
              points: Sequence[float] | None = None, max_panels: int = 20000,
              initial_panels: int = 1) -> QuadratureResult:
    """Adaptive 15-point Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    ``f`` must be vectorized: called with a 1-d array of abscissae it returns
    an array of the same length (real or complex), or a 2-d array of shape
    ``(len(x), m)`` for a vector-valued integrand sharing the same panels.

    Panels are bisected until each carries at most its length-proportional
    share of ``max(tol * |I|, tol_abs)``.  The result is a deterministic
    function of the inputs.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = float(a)
    b = float(b)
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    edges = [a]
    if points is not None:
        edges += sorted(float(p) for p in points if a < p < b)
    edges.append(b)
    fine = []
    for lo_e, hi_e in zip(edges[:-1], edges[1:]):
        fine.extend(np.linspace(lo_e, hi_e, initial_panels + 1)[:-1])
    fine.append(b)
    fine = np.array(fine)
    lo, hi = fine[:-1], fine[1:]

    total_len = b - a
    done_val = None
    done_err = 0.0
    done_count = 0
    scalar = None
    while True:
        kron, gauss, l1 = _gk_panels(f, lo, hi)
        if scalar is None:
            scalar = kron.shape[1] == 1
        err = np.max(np.abs(kron - gauss), axis=1)
        # current global estimate drives the relative target
        estimate = kron.sum(axis=0) + (done_val if done_val is not None else 0.0)
        target = max(tol * float(np.max(np.abs(estimate))), tol_abs)
        share = target * (hi - lo) / total_len
        # a panel whose rule difference is at the rounding level cannot improve
        ok = (err <= share) | (err <= 50 * np.finfo(float).eps * l1)
        # panels too small to split further are accepted as they are
        ok |= (hi - lo) <= 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(lo))
        accepted = kron[ok].sum(axis=0)
        done_val = accepted if done_val is None else done_val + accepted
        done_err += float(err[ok].sum())
        done_count += int(ok.sum())
        if ok.all():
            break
        lo_bad, hi_bad = lo[~ok], hi[~ok]
        if done_count + 2 * lo_bad.size > max_panels:
            partial = done_val + kron[~ok].sum(axis=0)
            raise QuadratureError(
                f"panel budget {max_panels} exhausted on [{a}, {b}]; "
                f"error estimate {done_err + float(err[~ok].sum()):.3e}",
                partial=partial[0] if scalar else partial,
            )
        mid = 0.5 * (lo_bad + hi_bad)
        lo = np.concatenate([lo_bad, mid])
        hi = np.concatenate([mid, hi_bad])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]

    value = sign * done_val
    if scalar:
        value = value[0]
        if np.isrealobj(value):
            value = float(value)
        else:
            value = complex(value)
    return QuadratureResult(value, done_err, done_count)


def integrate_semiinfinite(f: Callable, decay: tuple = ("power", 2.0), tol: float = 1e-10,
                           start: float = 0.0, cutoff: float | None = None,
                           points: Sequence[float] | None = None,
                           max_cutoff: float = 1e7) -> QuadratureResult:
    """Integrate ``f`` over ``[start, inf)`` given a decay model.

    ``decay`` is ``("power", p)`` for ``|f(u)| ~ C u^-p`` (p > 1) or
    ``("exp", rate)`` for ``|f(u)| ~ C e^{-rate u}``.  The integration runs to
    a cutoff ``U`` (fixed if ``cutoff`` is given, otherwise doubled until the
    modeled tail is below ``tol/2`` in relative terms).  For power decay the
    fitted tail is added to the value; the tail magnitude is recorded in
    ``tail_bound`` and folded into ``error_estimate``.
    """
    kind, rate = decay
    if kind not in ("power", "exp"):
        raise ValueError(f"unknown decay model {kind!r}")
    if kind == "power" and not rate > 1:
        raise ValueError("power decay needs exponent > 1")

    def tail_model(U):
        if kind == "power":
            # fit C u^-p on the last decade (two windows give a spread)
            us = np.array([U / 2.0, U])
            fu = _as_2d(f(us), 2)[:, 0]
            c_hi = fu[1] * U ** rate
            c_lo = fu[0] * (U / 2.0) ** rate
            tail = c_hi * U ** (1 - rate) / (rate - 1)
            spread = abs(c_hi - c_lo) * U ** (1 - rate) / (rate - 1)
            return tail, spread
        fu = _as_2d(f(np.array([U])), 1)[0, 0]
        return 0.0, abs(fu) / rate

    def panel_edges(U):
        edges = [start]
        step = 1.0
        x = start
        while x + step < U:
            x += step
            edges.append(x)
            step *= 2.0
        edges.append(U)
        if points is not None:
            edges += [p for p in points if start < p < U]
        return sorted(set(edges))

    U = float(cutoff) if cutoff is not None else max(start + 8.0, 16.0)
    while True:
        edges = panel_edges(U)
        core = integrate(f, start, U, tol=tol * 0.25, tol_abs=tol * 1e-3, points=edges[1:-1])
        tail, spread = tail_model(U)
        scale = max(abs(core.value), 1.0)
        if cutoff is not None or abs(tail) + spread < 0.5 * tol * scale:
            break
        U *= 2.0
        if U > max_cutoff:
            raise QuadratureError(
                f"tail bound not verifiable below cutoff {max_cutoff}",
                partial=core.value + tail)
    value = core.value + tail
    bound = abs(tail) + spread
    return QuadratureResult(value, core.error_estimate + spread, core.panels_used, bound)


# ---------------------------------------------------------------------------
# contours and winding numbers


@dataclass(frozen=True)
class Contour:
    """Closed contour parameterized on ``[0, 1]``.

    ``breaks`` are parameter values where the path has corners; sampling
    always includes them.
    """

    path: Callable[[np.ndarray], np.ndarray]
    breaks: tuple = (0.0, 1.0)

    def __call__(self, tau):
        return self.path(np.asarray(tau, dtype=float))


def polyline(vertices: Sequence[complex]) -> Contour:
    """Closed polygon through ``vertices`` (the last edge returns to the first)."""
    v = np.asarray(list(vertices) + [vertices[0]], dtype=complex)
    n = len(v) - 1

    def path(tau):
        s = np.clip(tau, 0.0, 1.0) * n
        i = np.minimum(np.floor(s).astype(int), n - 1)
        frac = s - i
        return v[i] + frac * (v[i + 1] - v[i])

    return Contour(path, tuple(np.linspace(0.0, 1.0, n + 1)))


def rectangle(x0: float, x1: float, y0: float, y1: float) -> Contour:
    """Counter-clockwise boundary of ``[x0, x1] x [y0, y1]``."""
    return polyline([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])


def circle(center: complex, radius: float) -> Contour:
    """Counter-clockwise circle."""
    def path(tau):
        return center + radius * np.exp(2j * np.pi * tau)
    return Contour(path, (0.0, 0.25, 0.5, 0.75, 1.0))


@dataclass(frozen=True)
class WindingResult:
    winding: int
    margin: float          # distance of the raw phase sum from the integer
    min_abs: float
    max_abs: float
    samples: int
    values: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def modulus_ratio(self) -> float:
        return self.min_abs / self.max_abs


def winding_number(phi: Callable, contour: Contour, max_step_phase: float = 0.5,
                   initial_samples: int = 64, max_samples: int = 200000,
                   floor: float = 1e-12) -> WindingResult:
    """Number of zeros of ``phi`` inside ``contour`` by phase tracking.

    The contour is sampled until consecutive phase increments are below
    ``max_step_phase`` and consecutive moduli differ by less than a factor 2.
    ``phi`` must accept an array of complex points.
    """
    if not 0 < max_step_phase <= np.pi / 2:
        raise ValueError("max_step_phase must lie in (0, pi/2]")
    breaks = np.asarray(contour.breaks, dtype=float)
    taus = np.unique(np.concatenate(
        [np.linspace(b0, b1, max(2, initial_samples // (len(breaks) - 1)) + 1)
         for b0, b1 in zip(breaks[:-1], breaks[1:])]))
    vals = np.asarray(phi(contour(taus)), dtype=complex)
    while True:
        if not np.all(np.isfinite(vals)):
            raise ContourTooCloseError("function is not finite on the contour")
        absval = np.abs(vals)
        if absval.min() < floor * absval.max():
            raise ContourTooCloseError(
                f"|phi| drops to {absval.min():.3e} (max {absval.max():.3e}) on the contour")
        ratio = vals[1:] / vals[:-1]
        dphase = np.angle(ratio)
        dmod = np.abs(np.log(np.abs(ratio)))
        bad = (np.abs(dphase) >= max_step_phase) | (dmod >= math.log(2.0))
        if not bad.any():
            break
        if taus.size + bad.sum() > max_samples:
            raise RuntimeError("winding number refinement budget exhausted")
        new_t = 0.5 * (taus[:-1][bad] + taus[1:][bad])
        new_v = np.asarray(phi(contour(new_t)), dtype=complex)
        taus = np.concatenate([taus, new_t])
        vals = np.concatenate([vals, new_v])
        order = np.argsort(taus, kind="stable")
        taus, vals = taus[order], vals[order]
    total = float(np.sum(dphase)) / (2 * np.pi)
    w = int(round(total))
    margin = abs(total - w)
    if margin > 0.1:
        raise RuntimeError(f"non-integer winding {total:.4f} after refinement")
    return WindingResult(w, margin, float(absval.min()), float(absval.max()), taus.size, vals)


# ---------------------------------------------------------------------------
# smooth bump


class SmoothBump:
    """``Phi(x) = exp(-sharpness / ((x-lo)(hi-x)))`` on ``(lo, hi)``, zero outside.

    The default (lo, hi, sharpness) = (1, 2, 1) is the test function used for
    the weight averages.  Every one-sided derivative vanishes at the endpoints.
    """

    def __init__(self, lo: float = 1.0, hi: float = 2.0, sharpness: float = 1.0, tol: float = 1e-12):
        if not lo < hi:
            raise ValueError("need lo < hi")
        self.lo = float(lo)
        self.hi = float(hi)
        self.sharpness = float(sharpness)
        self.tol = tol
        self._cache = {}

    def __repr__(self):
        return f"SmoothBump(lo={self.lo}, hi={self.hi}, sharpness={self.sharpness})"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x > self.lo) & (x < self.hi)
        xi = x[inside]
        out[inside] = np.exp(-self.sharpness / ((xi - self.lo) * (self.hi - xi)))
        return out if out.ndim else float(out)

    def derivative(self, x, n: int):
        """n-th derivative, via the Leibniz recursion for exp(g)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((n + 1, x.size))
        inside = (x > self.lo) & (x < self.hi)
        xi = x[inside]
        # g = -s/((x-lo)(hi-x)) = -s/(hi-lo) * (1/(x-lo) + 1/(hi-x))
        c = -self.sharpness / (self.hi - self.lo)
        gder = [None]
        for m in range(1, n + 1):
            gder.append(c * math.factorial(m) * ((-1) ** m / (xi - self.lo) ** (m + 1)
                                                 + 1.0 / (self.hi - xi) ** (m + 1)))
        vals = [np.exp(c * (1.0 / (xi - self.lo) + 1.0 / (self.hi - xi)))]
        for m in range(1, n + 1):
            acc = np.zeros_like(xi)
            for j in range(m):
                acc += math.comb(m - 1, j) * gder[j + 1] * vals[m - 1 - j]
            vals.append(acc)
        out[:, inside] = np.array(vals)
        res = out[n]
        return res if res.size > 1 else float(res[0])

    def integral(self, weight: Callable | None = None) -> float:
        """``int Phi(u) w(u) du`` over the support (w = 1 by default)."""
        if weight is None:
            if "mass" not in self._cache:
                self._cache["mass"] = integrate(self, self.lo, self.hi, tol=self.tol).value
            return self._cache["mass"]
        return integrate(lambda u: self(u) * weight(u), self.lo, self.hi, tol=self.tol).value

    def fourier(self, v: float) -> complex:
        """``hat Phi(v) = int Phi(u) e^{-2 pi i u v} du``."""
        return integrate(lambda u: self(u) * np.exp(-2j * np.pi * u * v),
                         self.lo, self.hi, tol=self.tol, tol_abs=self._abs_floor(2 * np.pi * abs(v) * self.hi),
                         initial_panels=max(1, int(abs(v) * (self.hi - self.lo)))).value

    def check(self, v: float) -> complex:
        """``check Phi(v) = int_0^inf Phi(sqrt u)/sqrt(2 pi u) e^{iuv} du``.

        Computed after substituting u = x^2, which turns it into
        ``sqrt(2/pi) int Phi(x) e^{i v x^2} dx``.
        """
        span = abs(v) * (self.hi ** 2 - self.lo ** 2) / (2 * np.pi)
        return math.sqrt(2 / math.pi) * integrate(
            lambda x: self(x) * np.exp(1j * v * x * x), self.lo, self.hi,
            tol=self.tol, tol_abs=self._abs_floor(abs(v) * self.hi ** 2),
            initial_panels=max(1, int(span) + 1)).value

    def _abs_floor(self, phase: float = 0.0):
        # oscillatory transforms can be far below the integrand scale, and the
        # phase itself is only known to about phase * eps
        return 1e-14 * self.integral() * (1.0 + phase)


def bump_transforms(bump: SmoothBump, v: float) -> tuple[complex, complex]:
    """Both transforms ``(hat Phi(v), check Phi(v))`` of a bump."""
    return bump.fourier(v), bump.check(v)


def pairwise_sum(values) -> complex | float:
    """Compensated sum with a fixed reduction order."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)
