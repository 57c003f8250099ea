"""Zero localization near the centre of the critical strip.

The triangle 1/2 < sigma < 1, |t| <= sigma - 1/2 is covered by a small disk
around 1/2 and a rectangle to its right; integer winding numbers on the two
boundaries certify that Lambda has no zeros in the open triangle.  The box
identity used for family averages is implemented separately as a checked
identity, and the central Hadamard product is compared against Lambda on the
real axis.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .lfunction import CompletedLFunction, DerivativeTable, lambda_derivatives
from .numerics import (ContourTooCloseError, circle, integrate, rectangle,
                       winding_number)

MARGIN_MIN = 0.05
NONZERO = 1e-8
ZERO = 1e-12


# ---------------------------------------------------------------------------
# targets


class FunctionTarget:
    """Any function obeying Lambda(s) = eps Lambda(1 - s), for certification.

    Used to plant zeros next to a genuine L-function.
    """

    def __init__(self, func: Callable, epsilon: int, label: str = "custom"):
        self._func = func
        self.epsilon = epsilon
        self.label = label
        self.k = None

    def Lambda(self, s):
        out = np.asarray(self._func(np.asarray(s, dtype=complex)), dtype=complex)
        return complex(out) if out.ndim == 0 else out


def planted(L: CompletedLFunction, zeros=(0.8,), label: str | None = None) -> FunctionTarget:
    """Lambda times (s - z)(s - (1 - z)) / ((s - 1/2)^2 + 1) for each z.

    Each factor is invariant under s -> 1 - s, so the root number is kept.
    """
    zs = [complex(z) for z in zeros]

    def func(s):
        out = L.Lambda(s)
        for z in zs:
            out = out * (s - z) * (s - (1 - z)) / ((s - 0.5) ** 2 + 1)
        return out

    return FunctionTarget(func, L.epsilon, label or f"{L.form.label}+planted")


def _as_target(f):
    if isinstance(f, (CompletedLFunction, FunctionTarget)):
        return f
    return CompletedLFunction(f)


def _label(target) -> str:
    return target.form.label if isinstance(target, CompletedLFunction) else target.label


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class TriangleRegion:
    """Closed triangle 1/2 < sigma < 1, |t| <= sigma - 1/2, split at radius rho."""

    rho: float = 0.02

    def __post_init__(self):
        if not 0.005 <= self.rho <= 0.1:
            raise ValueError("rho must lie in [0.005, 0.1]")

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (0.5 + self.rho / math.sqrt(2), 1.0, -0.5, 0.5)

    @staticmethod
    def contains(s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        return (s.real > 0.5) & (s.real < 1) & (np.abs(s.imag) <= s.real - 0.5)

    def covered(self, s) -> np.ndarray:
        """True where s lies in the closed disk or the closed rectangle."""
        s = np.asarray(s, dtype=complex)
        x0, x1, y0, y1 = self.rect
        in_disk = np.abs(s - 0.5) <= self.rho
        in_rect = (s.real >= x0) & (s.real <= x1) & (s.imag >= y0) & (s.imag <= y1)
        return in_disk | in_rect


@dataclass(frozen=True)
class SelbergBox:
    W0: float
    W1: float
    H: float

    def __post_init__(self):
        if not self.W0 < self.W1:
            raise ValueError("need W0 < W1")
        if not self.H > 0:
            raise ValueError("need H > 0")

    def contains(self, z: complex) -> bool:
        return self.W0 <= z.real <= self.W1 and abs(z.imag) <= self.H


# ---------------------------------------------------------------------------
# box identity


def selberg_lhs(zeros, box: SelbergBox) -> float:
    """4H sum cos(pi gamma / 2H) sinh(pi (beta - W0) / 2H) over zeros in the box."""
    W0, H = box.W0, box.H
    tot = 0.0
    for z in zeros:
        z = complex(z)
        if box.contains(z):
            tot += math.cos(math.pi * z.imag / (2 * H)) * math.sinh(math.pi * (z.real - W0) / (2 * H))
    return 4 * H * tot


def _log_on_line(phi, W1, H, panels, nodes=20):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(-H, H, panels + 1)
    half = 0.5 * np.diff(edges)
    t = ((edges[:-1] + half)[:, None] + half[:, None] * x).ravel()
    wt = (half[:, None] * w).ravel()
    vals = np.asarray(phi(W1 + 1j * t), dtype=complex)
    arg = np.unwrap(np.angle(vals))
    return t, wt, np.log(np.abs(vals)) + 1j * arg, float(np.max(np.abs(np.diff(arg))))


def selberg_rhs(phi: Callable, box: SelbergBox, tol: float = 1e-12,
                max_step_phase: float = 0.5) -> float:
    """The three boundary integrals of the box identity.

    ``phi`` takes arrays of complex points.  On the right edge log phi is
    continued along the line from a principal value at W1 - iH; a constant
    multiple of 2 pi i contributes nothing to the real part.
    """
    W0, W1, H = box.W0, box.W1, box.H
    a = math.pi / (2 * H)

    def left(t):
        return np.cos(a * t) * np.log(np.abs(phi(W0 + 1j * t)))

    def horizontal(al):
        return np.sinh(a * (al - W0)) * np.log(np.abs(phi(al + 1j * H) * phi(al - 1j * H)))

    I1 = integrate(left, -H, H, tol=tol, tol_abs=tol).value
    I2 = integrate(horizontal, W0, W1, tol=tol, tol_abs=tol).value

    panels, prev = 8, None
    while True:
        t, wt, logphi, step = _log_on_line(phi, W1, H, panels)
        if step < max_step_phase:
            kern = np.cos(a * t - 1j * a * (W1 - W0))
            I3 = float(np.real(np.sum(wt * kern * logphi)))
            if prev is not None and abs(I3 - prev) <= tol * max(1.0, abs(I3)):
                break
            prev = I3
        panels *= 2
        if panels > 4096:
            raise RuntimeError("branch tracking on the right edge did not settle")
    return float(I1 + I2 - I3)


def selberg_identity_check(phi: Callable, zeros, box: SelbergBox, tol: float = 1e-12) -> float:
    """|LHS - RHS| of the box identity for a function with known zeros."""
    return abs(selberg_lhs(zeros, box) - selberg_rhs(phi, box, tol=tol))


def polynomial_from_zeros(zeros, scale: complex = 1.0) -> Callable:
    zs = [complex(z) for z in zeros]

    def phi(s):
        out = np.full(np.shape(s), scale, dtype=complex)
        for z in zs:
            out = out * (s - z)
        return out

    return phi


# ---------------------------------------------------------------------------
# triangle certificate


@dataclass
class ZeroCertificate:
    form: str
    central_order: int | None
    disk_winding: int | None
    rect_winding: int | None
    rho: float
    margins: dict = field(default_factory=dict)
    verdict: str = "failed"
    reason: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def central_order(target, max_order: int = 12, derivs: DerivativeTable | None = None) -> tuple[int, DerivativeTable]:
    """Order of vanishing of Lambda at 1/2.

    Only orders of the parity forced by the root number are candidates.  A
    candidate derivative in (1e-12, 1e-8) is ambiguous and raises.
    """
    derivs = derivs if derivs is not None else lambda_derivatives(target, 0.5, max_order)
    start = 0 if target.epsilon == 1 else 1
    for j in range(start, len(derivs.values), 2):
        v = abs(derivs.values[j])
        if v > NONZERO:
            return j, derivs
        if v > ZERO:
            raise ArithmeticError(f"derivative of order {j} is {v:.2e}: neither zero nor clearly nonzero")
    raise ArithmeticError(f"no nonzero derivative up to order {len(derivs.values) - 1}")


def certify_region(target, m: int, rho: float = 0.02) -> ZeroCertificate:
    """Disk and rectangle windings for a known central order m."""
    region = TriangleRegion(rho)
    label = _label(target)
    cert = ZeroCertificate(label, m, None, None, rho)
    try:
        disk = winding_number(target.Lambda, circle(0.5, rho))
        x0, x1, y0, y1 = region.rect
        # dividing out the central zero keeps |.| level along the rectangle;
        # 1/2 is outside so the count is unchanged
        rect = winding_number(lambda s: target.Lambda(s) / (s - 0.5) ** m, rectangle(x0, x1, y0, y1))
    except (ContourTooCloseError, RuntimeError) as exc:
        cert.reason = str(exc)
        return cert
    cert.disk_winding, cert.rect_winding = disk.winding, rect.winding
    cert.margins = {"disk_modulus": disk.modulus_ratio, "rect_modulus": rect.modulus_ratio,
                    "disk_integer": disk.margin, "rect_integer": rect.margin,
                    "disk_min_abs": disk.min_abs, "rect_min_abs": rect.min_abs}
    if min(disk.modulus_ratio, rect.modulus_ratio) <= MARGIN_MIN:
        cert.reason = "modulus margin below 0.05"
        return cert
    if disk.winding == m and rect.winding == 0:
        cert.verdict = "certified"
    else:
        cert.verdict = "not-certified"
        cert.reason = f"disk winding {disk.winding} (central order {m}), rect winding {rect.winding}"
    return cert


def certify_triangle(f, rho: float = 0.02) -> ZeroCertificate:
    """Certify that Lambda(s, f) has no zeros in the open triangle.

    ``f`` is a HeckeEigenform, a CompletedLFunction or a FunctionTarget.
    """
    target = _as_target(f)
    try:
        m, _ = central_order(target)
    except (ArithmeticError, RuntimeError) as exc:
        return ZeroCertificate(_label(target), None, None, None, rho, reason=str(exc))
    return certify_region(target, m, rho)


# ---------------------------------------------------------------------------
# derivative positivity


CLAUSE2_SIGMAS = (0.6, 0.75, 0.9, 1.1)


def superpositivity_report(f, max_order: int = 12, sigmas=CLAUSE2_SIGMAS) -> dict:
    """Signs of Lambda^{(j)} at 1/2 and to the right of it.

    clause1: every derivative at 1/2 is >= 0 (wrong-parity ones are zero);
    clause2: every derivative at each sigma in ``sigmas`` is > 0;
    clause3: from the first nonzero order k0, orders k0 + 2i stay nonzero.
    """
    L = _as_target(f)
    centre = lambda_derivatives(L, 0.5, max_order)
    k0, _ = central_order(L, max_order, centre)
    vals = centre.values.real
    err = centre.error_estimate
    parity = 0 if L.epsilon == 1 else 1
    clause1 = []
    for j in range(max_order + 1):
        if j % 2 != parity:
            ok = abs(centre.values[j]) <= max(ZERO, 10 * err[j])
        else:
            ok = vals[j] >= -max(ZERO, 10 * err[j])
        clause1.append(bool(ok))
    clause3 = [bool(abs(vals[j]) > NONZERO) for j in range(k0, max_order + 1, 2)]
    clause2 = {}
    for sg in sigmas:
        d = lambda_derivatives(L, sg, max_order)
        clause2[sg] = {"values": d.values.real.tolist(),
                       "pass": bool(np.all(d.values.real > 10 * d.error_estimate))}
    L_check = None
    if isinstance(L, CompletedLFunction):
        # zeros right of 1 are excluded by the Euler product
        L_check = abs(L.L(1.1) - 1)
    return {
        "form": _label(L),
        "central_order": k0,
        "derivatives": vals.tolist(),
        "error_estimate": err.tolist(),
        "clause1": all(clause1),
        "clause1_by_order": clause1,
        "clause2": all(v["pass"] for v in clause2.values()),
        "clause2_by_sigma": clause2,
        "clause3": all(clause3),
        "euler_1p1": L_check,
    }


# ---------------------------------------------------------------------------
# Hadamard product on the real axis


@dataclass
class HadamardResult:
    T: float
    zeros: np.ndarray
    sign_count: int
    winding_count: int
    A: float
    m: int
    sigmas: np.ndarray
    product: np.ndarray
    exact: np.ndarray
    gap: float


def _line_part(L, t):
    v = L.Lambda(0.5 + 1j * np.asarray(t, dtype=float))
    return v.real if L.epsilon == 1 else v.imag


def critical_zeros(L, t0: float, T: float, step: float = 0.05, tol: float = 1e-9) -> np.ndarray:
    """Sign changes of the real-valued Lambda(1/2 + it) on (t0, T], bisected to ``tol``."""
    t = np.arange(t0, T + step / 2, step)
    t[-1] = min(t[-1], T)
    z = _line_part(L, t)
    idx = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
    lo, hi = t[idx].copy(), t[idx + 1].copy()
    flo = z[idx].copy()
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = _line_part(L, mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def strip_zero_count(L, t0: float, T: float) -> int:
    """Zeros in [0.45, 0.55] x [t0, T] by winding.

    Lambda is multiplied by e^{-i pi s/2} (s + k/2)^{-k/2}, which has no
    zeros there and levels out the Gamma-factor decay along the strip.
    """
    k = L.k

    def phi(s):
        return L.Lambda(s) * np.exp(-0.5j * np.pi * s) * (s + k / 2) ** (-k / 2)

    return winding_number(phi, rectangle(0.45, 0.55, t0, T)).winding


def hadamard_cross_check(f, T: float = 30.0, sigmas=None) -> HadamardResult:
    """Truncated central Hadamard product against Lambda(1/2 + sigma).

    lambda(w) = Lambda(1/2 + w) = w^m e^A prod (1 + w^2/gamma^2) over the
    critical-line zeros 0 < gamma <= T; e^A comes from the first nonzero
    derivative at the centre.  The relative gap shrinks as T grows.
    """
    if T > 30:
        raise ValueError("T must be <= 30")
    L = _as_target(f)
    sigmas = np.linspace(0.1, 0.5, 9) if sigmas is None else np.asarray(sigmas, dtype=float)
    m, derivs = central_order(L)
    lead = float(derivs.values[m].real) / math.factorial(m)
    if lead <= 0:
        raise ArithmeticError("leading central coefficient is not positive")
    # the central zero sits on the bottom edge when m > 0
    t0 = 0.25 if m > 0 else 0.0
    zeros = critical_zeros(L, t0, T)
    count = strip_zero_count(L, t0, T)
    if count != zeros.size:
        raise RuntimeError(f"sign changes found {zeros.size} zeros but the winding count is {count}")
    w = sigmas
    prod = w ** m * lead * np.prod(1 + (w[:, None] / zeros[None, :]) ** 2, axis=1)
    exact = L.Lambda(0.5 + w).real
    gap = float(np.max(np.abs(exact - prod) / np.abs(exact)))
    return HadamardResult(T, zeros, int(zeros.size), count, math.log(lead), m, w, prod, exact, gap)
