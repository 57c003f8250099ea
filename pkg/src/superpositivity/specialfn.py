"""Special functions and arithmetic tables.

Complex Gamma (scipy-backed), an Euler-Maclaurin zeta, the upper incomplete
Gamma for real arguments, Bessel J of integer order (scipy-backed), the
imaginary-order combinations J+ and K+, the generalized divisor function,
Kloosterman sums, and the smooth cutoff H with its Mellin transform.
"""

from __future__ import annotations

import math
from collections import namedtuple
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .numerics import integrate


class PoleError(ValueError):
    """Evaluation requested at a pole."""


# ---------------------------------------------------------------------------
# Gamma


def _check_gamma_pole(s):
    s = np.asarray(s, dtype=complex)
    bad = (s.imag == 0) & (s.real <= 0) & (s.real == np.round(s.real))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {s[bad].ravel()[0]}")


def gamma(s):
    """Complex Gamma function."""
    _check_gamma_pole(s)
    out = sp.gamma(np.asarray(s, dtype=complex))
    return complex(out) if out.ndim == 0 else out


def loggamma(s):
    """Principal branch of log Gamma (continuous off the negative real axis)."""
    _check_gamma_pole(s)
    out = sp.loggamma(np.asarray(s, dtype=complex))
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# zeta

_EM_TERMS = 20
_B2J = sp.bernoulli(2 * _EM_TERMS)[2::2]                     # B_2, B_4, ..., B_40
_B2J_OVER_FACT = np.array([_B2J[j] / math.factorial(2 * j + 2) for j in range(_EM_TERMS)])


def _zeta_parts(s: complex):
    """Euler-Maclaurin pieces: (head + corrections, N) without the pole term."""
    N = 20 + int(math.ceil(abs(s)))
    n = np.arange(1, N, dtype=float)
    head = np.sum(np.exp(-s * np.log(n)))
    logN = math.log(N)
    Ns = np.exp(-s * logN)
    acc = 0.5 * Ns
    # B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    rising = s
    power = Ns / N
    for j in range(_EM_TERMS):
        term = _B2J_OVER_FACT[j] * rising * power
        acc += term
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
        power /= N * N
    return head + acc, N


def _expm1_over(x: complex) -> complex:
    """(e^x - 1)/x, stable near 0."""
    if abs(x) < 1e-5:
        return 1 + x / 2 + x * x / 6
    return np.expm1(x) / x


def zeta(s):
    """Riemann zeta via Euler-Maclaurin summation."""
    if np.ndim(s):
        return np.array([zeta(v) for v in np.ravel(s)]).reshape(np.shape(s))
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    body, N = _zeta_parts(s)
    return complex(body + np.exp((1 - s) * math.log(N)) / (s - 1))


def zeta_minus_pole(s):
    """zeta(s) - 1/(s-1), finite at s = 1 (value Euler's constant there)."""
    if np.ndim(s):
        return np.array([zeta_minus_pole(v) for v in np.ravel(s)]).reshape(np.shape(s))
    s = complex(s)
    body, N = _zeta_parts(s)
    L = math.log(N)
    # (N^{1-s} - 1)/(s-1) = -L * (e^{(1-s)L} - 1)/((1-s)L)
    return complex(body - L * _expm1_over((1 - s) * L))


# ---------------------------------------------------------------------------
# incomplete Gamma (real arguments)

LogScaled = namedtuple("LogScaled", "log_value")


def _gamma_series_log_lower(a, x):
    # log gamma(a, x) lower, from e^{-x} x^a sum x^n / (a)_{n+1}
    term = 1.0 / a
    total = term
    n = 0
    while abs(term) > 1e-17 * abs(total):
        n += 1
        term *= x / (a + n)
        total += term
        if n > 10000:
            raise RuntimeError("incomplete gamma series did not converge")
    return -x + a * math.log(x) + math.log(total)


def _gamma_cf_log_upper(a, x):
    # modified Lentz for the continued fraction of Gamma(a, x) e^x x^{-a}
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise RuntimeError("incomplete gamma continued fraction did not converge")
    return -x + a * math.log(x) + math.log(h)


def log_incomplete_gamma_upper(a: float, x: float) -> float:
    """log Gamma(a, x) for real a > 0, x >= 0."""
    if not a > 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return math.lgamma(a)
    if x > a + 1:
        return _gamma_cf_log_upper(a, x)
    lg = math.lgamma(a)
    ratio = math.exp(_gamma_series_log_lower(a, x) - lg)
    return lg + math.log1p(-ratio)


def incomplete_gamma_upper(a: float, x: float):
    """Upper incomplete Gamma(a, x) for real a > 0, x >= 0.

    Series below ``x = a + 1``, continued fraction above.  When the value
    overflows a double, a ``LogScaled(log_value)`` is returned instead.
    """
    lv = log_incomplete_gamma_upper(a, x)
    if lv > 709.0:
        return LogScaled(lv)
    return math.exp(lv)


# ---------------------------------------------------------------------------
# Bessel functions


def bessel_j_integer(k: int, x):
    """J_k(x) for integer k >= 0 and x >= 0 (scipy backend)."""
    if k < 0 or k != int(k):
        raise ValueError("order must be a non-negative integer")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("argument must be non-negative")
    out = sp.jv(int(k), xa)
    return float(out) if out.ndim == 0 else out


_GL16 = np.polynomial.legendre.leggauss(16)


def _composite_gl(a, b, panels):
    """Nodes and weights of a composite 16-point Gauss-Legendre rule."""
    x0, w0 = _GL16
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x0[None, :]).ravel()
    weights = (half[:, None] * w0[None, :]).ravel()
    return nodes, weights


def _hankel_coeffs(t, zmin, tol=1e-17):
    """Hankel expansion coefficients a_k(2it) with 4 nu^2 = -16 t^2.

    Truncated at the smallest term at argument ``zmin`` (or ``tol``).
    """
    mu = -16.0 * t * t
    coeffs = [1.0]
    k = 0
    while True:
        k += 1
        nxt = coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0)
        if abs(nxt) / zmin ** k > abs(coeffs[-1]) / zmin ** (k - 1) or abs(nxt) / zmin ** k < tol:
            break
        coeffs.append(nxt)
        if k > 60:
            break
    return np.array(coeffs)


_ASYM_START = 60.0


def _asym_ok(t):
    return max(_ASYM_START, 20.0 * (1 + 4 * t * t))


def _jplus_asym(t, x):
    a = _hankel_coeffs(t, x.min())
    P = np.zeros_like(x)
    Q = np.zeros_like(x)
    for k, ak in enumerate(a):
        term = ak / x ** k
        if k % 4 == 0:
            P += term
        elif k % 4 == 1:
            Q += term
        elif k % 4 == 2:
            P -= term
        else:
            Q -= term
    w = x - math.pi / 4
    return -np.sqrt(8 * math.pi / x) * (P * np.sin(w) + Q * np.cos(w))


def _kplus_asym(t, x):
    a = _hankel_coeffs(t, x.min())
    series = sum(ak / x ** k for k, ak in enumerate(a))
    return 4 * math.cosh(math.pi * t) * np.sqrt(math.pi / (2 * x)) * np.exp(-x) * series


def _jplus_quad(t, x):
    # -(2/sinh pi t) int_0^pi sinh(2 t th) sin(x sin th) + 4 cosh(pi t) int_0^inf e^{-x sinh u} cos(2tu)
    th, wt = _composite_gl(0.0, math.pi, int(math.ceil(x.max() / 3.0)) + 6)
    if t == 0:
        weight = 2 * th / math.pi
    else:
        weight = np.sinh(2 * t * th) / math.sinh(math.pi * t)
    I1 = np.sin(np.outer(x, np.sin(th))) @ (weight * wt)
    U = math.asinh(45.0 / x.min()) + 1.0
    u, wu = _composite_gl(0.0, U, int(math.ceil(4 * U * (1 + abs(t)))) + 4)
    I2 = np.exp(-np.outer(x, np.sinh(u))) @ (np.cos(2 * t * u) * wu)
    return -2 * I1 + 4 * math.cosh(math.pi * t) * I2


def _kplus_quad(t, x):
    U = math.acosh(1.0 + 45.0 / x.min()) + 0.5
    u, wu = _composite_gl(0.0, U, int(math.ceil(4 * U * (1 + abs(t)))) + 4)
    inner = np.exp(-np.outer(x, np.cosh(u) - 1.0)) @ (np.cos(2 * t * u) * wu)
    return 4 * math.cosh(math.pi * t) * np.exp(-x) * inner


def _bessel_imag_mpmath(t, x):
    import mpmath as mp
    with mp.workdps(30 + int(2 * abs(t))):
        nu = mp.mpc(0, 2 * t)
        jp = -mp.pi / mp.sin(mp.pi * nu / 2) * (mp.besselj(nu, x) - mp.besselj(-nu, x))
        kp = 4 * mp.cos(mp.pi * nu / 2) * mp.besselk(nu, x)
        return float(mp.re(jp)), float(mp.re(kp))


def bessel_imag_order(t: float, x):
    """The pair (J+_{2it}(x), K+_{2it}(x)) for real t and x > 0.

    ``J+_nu = -pi/sin(pi nu/2) (J_nu - J_{-nu})`` and
    ``K+_nu = 4 cos(pi nu/2) K_nu``; both are real for nu = 2it.  Small and
    moderate arguments use integral representations on a fixed composite
    Gauss-Legendre grid, large arguments the Hankel expansion.  For
    |t| > 3 the integral representation loses about e^{pi|t|} in relative
    accuracy, so mpmath is used instead.  At t = 0 the values are the
    limits -2 pi Y_0(x) and 4 K_0(x).
    """
    t = float(t)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise ValueError("x must be positive")
    jp = np.empty_like(xa)
    kp = np.empty_like(xa)
    if abs(t) > 3.0:
        for i, xv in enumerate(xa):
            jp[i], kp[i] = _bessel_imag_mpmath(t, float(xv))
    else:
        big = xa >= _asym_ok(t)
        if big.any():
            jp[big] = _jplus_asym(t, xa[big])
            kp[big] = _kplus_asym(t, xa[big])
        small = ~big
        if small.any():
            # group by magnitude so the theta grid tracks the oscillation count
            xs = xa[small]
            order = np.argsort(xs)
            jv_small = np.empty_like(xs)
            kv_small = np.empty_like(xs)
            for chunk in np.array_split(order, max(1, int(math.ceil(xs.size / 256)))):
                jv_small[chunk] = _jplus_quad(t, xs[chunk])
                kv_small[chunk] = _kplus_quad(t, xs[chunk])
            jp[small] = jv_small
            kp[small] = kv_small
    if np.ndim(x) == 0:
        return float(jp[0]), float(kp[0])
    return jp, kp


# ---------------------------------------------------------------------------
# arithmetic


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def eta(nu, n: int) -> complex:
    """Generalized divisor function sum_{ad=n} (a/d)^nu."""
    if n < 1:
        raise ValueError("n must be positive")
    nu = complex(nu)
    return complex(sum(np.exp(nu * math.log(a / (n // a))) for a in divisors(n)))


def eta_table(nu, N: int) -> np.ndarray:
    """eta_nu(n) for n = 0..N (entry 0 unused), via n^{-nu} sigma_{2 nu}(n)."""
    nu = complex(nu)
    sigma = np.zeros(N + 1, dtype=complex)
    for d in range(1, N + 1):
        sigma[d::d] += np.exp(2 * nu * math.log(d))
    n = np.arange(N + 1, dtype=float)
    n[0] = 1.0
    out = sigma * np.exp(-nu * np.log(n))
    out[0] = 0.0
    return out


@lru_cache(maxsize=4096)
def _units_and_inverses(c: int):
    xs = [x for x in range(c) if math.gcd(x, c) == 1]
    if c == 1:
        return np.array([0]), np.array([0])
    return np.array(xs), np.array([pow(x, -1, c) for x in xs])


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) by direct enumeration over units mod c."""
    if c < 1:
        raise ValueError("c must be positive")
    x, xbar = _units_and_inverses(int(c))
    phase = 2 * np.pi * (((m * x + n * xbar) % c) / c)
    total = complex(np.sum(np.exp(1j * phase)))
    assert abs(total.imag) < 1e-9 * c, "Kloosterman sum has an imaginary part"
    return total.real


class ArithmeticTable:
    """Sieved mu, tau, phi, rad and sigma_k up to N (inclusive)."""

    def __init__(self, N: int):
        self.N = N
        spf = np.zeros(N + 1, dtype=np.int64)         # smallest prime factor
        for p in range(2, N + 1):
            if spf[p] == 0:
                spf[p::p][spf[p::p] == 0] = p
        self.spf = spf
        mu = np.ones(N + 1, dtype=np.int64)
        phi = np.arange(N + 1, dtype=np.int64)
        rad = np.ones(N + 1, dtype=np.int64)
        tau = np.ones(N + 1, dtype=np.int64)
        primes = np.nonzero(spf[2:] == np.arange(2, N + 1))[0] + 2
        self.primes = primes
        for p in primes:
            mu[p::p] *= -1
            if p * p <= N:
                mu[p * p::p * p] = 0
            phi[p::p] = phi[p::p] // p * (p - 1)
            rad[p::p] *= p
            # exponent of p in each multiple
            e = np.zeros(N // p, dtype=np.int64)
            pk = p
            while pk <= N:
                e[pk // p - 1::pk // p] += 1
                pk *= p
            tau[p::p] *= e + 1
        mu[0] = phi[0] = rad[0] = tau[0] = 0
        self.mu, self.phi, self.rad, self.tau = mu, phi, rad, tau

    def sigma(self, k) -> np.ndarray:
        out = np.zeros(self.N + 1, dtype=float if k == int(k) and k >= 0 else complex)
        for d in range(1, self.N + 1):
            out[d::d] += float(d) ** k
        return out

    def squarefree(self, n: int) -> bool:
        return self.mu[n] != 0


# ---------------------------------------------------------------------------
# the cutoff H


def _psi(u):
    u = np.asarray(u, dtype=float)
    out = np.where(u <= -1, 1.0, 0.0)
    inside = np.abs(u) < 1
    ui = u[inside]
    out[inside] = 0.5 * (1 - np.tanh(ui / (1 - ui * ui)))  # = 1/(1+exp(2u/(1-u^2)))
    return out


def _dpsi(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    ui = u[inside]
    g = ui / (1 - ui * ui)
    dg = (1 + ui * ui) / (1 - ui * ui) ** 2
    e = np.exp(-2 * np.abs(g))
    out[inside] = -2.0 * dg * e / (1 + e) ** 2          # -(1/2) sech^2(g) g'
    return out


def cutoff_h(x):
    """H(x) = psi(log2 x) on [1/2, 2], 1 below, 0 above.

    psi(u) = 1/(1 + exp(2u/(1-u^2))), so H(x) + H(1/x) = 1 identically.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("H is defined on x >= 0")
    with np.errstate(divide="ignore"):
        u = np.where(xa > 0, np.log2(np.where(xa > 0, xa, 1.0)), -np.inf)
    out = _psi(np.clip(u, -2, 2))
    return float(out) if out.ndim == 0 else out


def mellin_h(s, tol: float = 1e-13):
    """H~(s) = int_0^inf H(y) y^{s-1} dy, continued to C minus {0}.

    Computed as -(1/s) int_{-1}^{1} psi'(u) 2^{us} du (integration by parts
    after y = 2^u).  The integral is entire and even in s, so H~ is odd
    with residue -int psi' = 1 at the origin.
    """
    sa = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(sa == 0):
        raise PoleError("H~ has a pole at s = 0")
    ln2 = math.log(2.0)
    span = float(np.max(np.abs(sa.imag))) * 2 * ln2 / (2 * math.pi)

    def integrand(u):
        return _dpsi(u)[:, None] * np.exp(np.outer(u * ln2, sa))

    res = integrate(integrand, -1.0, 1.0, tol=tol, tol_abs=1e-18,
                    initial_panels=max(2, int(span) + 2))
    out = -np.asarray(res.value).reshape(-1) / sa
    if np.ndim(s) == 0:
        return complex(out[0])
    return out.reshape(np.shape(s))


def mellin_h_direct(s: complex, tol: float = 1e-13) -> complex:
    """H~(s) as (1/2)^s/s + int_{1/2}^2 H(y) y^{s-1} dy (independent route)."""
    s = complex(s)
    if s == 0:
        raise PoleError("H~ has a pole at s = 0")
    body = integrate(lambda y: cutoff_h(y) * np.exp((s - 1) * np.log(y)), 0.5, 2.0,
                     tol=tol, tol_abs=1e-18, initial_panels=4).value
    return 0.5 ** s / s + body
