"""Mollifier coefficients, the twisted second moment and the T Euler product."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenforms import HeckeEigenform, dim_cusp, hecke_basis
from .lfunction import CompletedLFunction, l_squared_afe
from .numerics import SmoothBump, integrate
from .specialfn import ArithmeticTable, eta, zeta, zeta_minus_pole


@dataclass(frozen=True)
class MollifierParams:
    """Parameters of the mollifier; defaults are the ones used for the constants."""

    theta: float = 1e-10
    upsilon: float = 0.64
    R: float = 4.0
    S: float | None = None
    M_exponent: float | None = None

    def __post_init__(self):
        if not 0 < self.upsilon < 1:
            raise ValueError("upsilon must lie in (0, 1)")
        if self.S is None:
            object.__setattr__(self, "S", math.pi / (4 * (1 - self.upsilon) * (1 - 20 * self.theta)))
        if self.M_exponent is None:
            object.__setattr__(self, "M_exponent", 1 - 5 * self.theta)

    @property
    def d(self) -> float:
        return 2 * self.S / 3

    @property
    def P_coeffs(self) -> tuple:
        """P(x) = 3 (x/U)^2 - 2 (x/U)^3 as power-series coefficients."""
        U = self.upsilon
        return (0.0, 0.0, 3 / U ** 2, -2 / U ** 3)

    def P(self, x):
        return np.polynomial.polynomial.polyval(x, self.P_coeffs)

    def dP(self, x):
        return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(self.P_coeffs))

    def Q(self, x):
        return 1 - self.P(self.upsilon + (1 - self.upsilon) * np.asarray(x, dtype=float))

    def M(self, K: float) -> float:
        return K ** self.M_exponent


DEFAULT = MollifierParams()


def f_cutoff(x, params: MollifierParams = DEFAULT, M: float = 100.0):
    """F_{U,M}(x): 1 up to M^{1-U}, P(log(M/x)/log M) up to M, then 0."""
    if M <= 10:
        raise ValueError("M must exceed 10")
    xa = np.asarray(x, dtype=float)
    out = np.zeros_like(xa)
    knot = M ** (1 - params.upsilon)
    out[xa <= knot] = 1.0
    mid = (xa > knot) & (xa < M)
    out[mid] = params.P(np.log(M / xa[mid]) / math.log(M))
    return out if out.ndim else float(out)


def f_cutoff_split(x, params: MollifierParams = DEFAULT, M: float = 100.0):
    """The same function rebuilt from the P-part on [1, M] and the Q-part on [1, M^{1-U}]."""
    xa = np.asarray(x, dtype=float)
    y2 = M ** (1 - params.upsilon)
    p_part = np.where(xa <= M, params.P(np.log(M / np.minimum(xa, M)) / math.log(M)), 0.0)
    q_part = np.where(xa <= y2, params.Q(np.log(y2 / np.minimum(xa, y2)) / math.log(y2)), 0.0)
    return p_part + q_part


@dataclass
class MollifiedSeries:
    """x_l(s) = sum_n mu^2(l n) mu(l) F(l n) / n^{2s}, for l <= M."""

    s: complex
    M: float
    params: MollifierParams = DEFAULT
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        top = int(math.floor(self.M))
        ar = ArithmeticTable(top)
        F = f_cutoff(np.arange(top + 1, dtype=float), self.params, self.M)
        sq = ar.mu != 0
        x = np.zeros(top + 1, dtype=complex)
        for ell in range(1, top + 1):
            if not sq[ell]:
                continue
            n = np.arange(1, top // ell + 1)
            ok = sq[ell * n]
            x[ell] = ar.mu[ell] * np.sum(F[ell * n[ok]] / n[ok].astype(float) ** (2 * self.s))
        self.x = x

    def __getitem__(self, ell: int) -> complex:
        return complex(self.x[ell]) if ell < len(self.x) else 0j


def mollifier_value(f: HeckeEigenform, s: complex, K: float, params: MollifierParams = DEFAULT):
    """M(s, f) two ways: sum a_f(n) F(rad n)/n^s and sum x_l(s) lambda_f(l)/l^s.

    Returns (direct, via_x).
    """
    M = params.M(K)
    top = int(math.floor(M))
    if top >= f.N:
        raise ValueError(f"need lambda_f(n) for n <= {top}")
    ar = ArithmeticTable(top)
    F = f_cutoff(np.arange(top + 1, dtype=float), params, M)
    s = complex(s)
    direct = 0j
    # a_f(m q^2) = mu(m) lambda_f(m) for m, q squarefree and coprime; rad = m q
    for m in range(1, top + 1):
        if ar.mu[m] == 0:
            continue
        for q in range(1, top // m + 1):
            if ar.mu[q] == 0 or math.gcd(m, q) != 1 or F[m * q] == 0:
                continue
            direct += ar.mu[m] * f.lam[m] * F[m * q] / float(m * q * q) ** s
    xs = MollifiedSeries(s, M, params)
    ell = np.arange(1, top + 1)
    via_x = complex(np.sum(xs.x[1:] * f.lam[1:top + 1] / ell.astype(float) ** s))
    return complex(direct), via_x


def inverse_coefficients(N: int, K: float, params: MollifierParams = DEFAULT) -> np.ndarray:
    """c(n) = sum_{d | n} mu(d) F(d) for n <= N."""
    M = params.M(K)
    ar = ArithmeticTable(N)
    F = f_cutoff(np.arange(N + 1, dtype=float), params, M)
    c = np.zeros(N + 1)
    for d in range(1, N + 1):
        if ar.mu[d] and F[d]:
            c[d::d] += ar.mu[d] * F[d]
    return c


# ---------------------------------------------------------------------------
# twisted second moment


@dataclass
class MainTerms:
    term1: complex | None
    term2: complex | None
    term3: float
    total: float
    merged: bool


_MERGE = 1e-6


def twisted_moment_main(ell: int, delta: float, t: float, K: float, Phi: SmoothBump | None = None,
                        B: float = 4.0, check_range: bool = True) -> MainTerms:
    """The three main terms of the twisted second moment.

    For |delta| < 1e-6 the first two terms are merged: their zeta poles at
    delta = 0 cancel and the pair is replaced by its limit.  At t = 0 the
    third term is taken as its limit in t.  ``check_range=False`` skips the
    parameter-range checks (the formula itself is defined for any real delta).
    """
    Phi = Phi if Phi is not None else SmoothBump()
    if check_range:
        if not -B / math.log(K) <= delta <= 0.01:
            raise ValueError("delta outside [-B/log K, 1/100]")
        if abs(t) > K ** (1 / 200):
            raise ValueError("|t| exceeds K^{1/200}")
        if ell > K ** (2 - 4 / 100):
            raise ValueError("ell exceeds K^{2-4/100}")

    def mom(expo):
        return integrate(lambda u: Phi(u) * u ** expo, Phi.lo, Phi.hi, tol=1e-13).value

    lo, hi = Phi.lo, Phi.hi
    q = K / 4
    lk = math.log(K / (4 * math.pi))
    et = eta(1j * t, ell).real
    I0 = mom(0.0)

    if abs(delta) >= _MERGE:
        A = et * ell ** (-0.5 - delta) * q * I0
        Bv = et * ell ** (-0.5 + delta) * math.exp(-4 * delta * lk) * q * mom(-4 * delta)
        term1 = complex(zeta(1 + 2 * delta)) * A
        term2 = complex(zeta(1 - 2 * delta)) * Bv
        pair = (term1 + term2).real
    else:
        # zeta(1 + x) = 1/x + zmp(1 + x); the 1/x parts combine to (A - B)/(2 delta)
        A0 = et * ell ** -0.5 * q * I0
        Ilog = integrate(lambda u: Phi(u) * np.log(u), lo, hi, tol=1e-13).value
        dA = -math.log(ell) * A0
        dB = (math.log(ell) - 4 * lk) * A0 - 4 * et * ell ** -0.5 * q * Ilog
        zm = complex(zeta_minus_pole(1.0)).real
        pair = 2 * zm * A0 + (dA - dB) / 2
        term1 = term2 = None

    def X(tt):
        return (eta(delta, ell) * ell ** (-0.5 - 1j * tt)
                * np.exp((-2 * delta + 2j * tt) * lk) * q * mom(-2 * delta + 2j * tt))

    if t != 0:
        term3 = -2 * (complex(zeta(1 + 2j * t)) * X(t)).real
    else:
        # zeta(1 + 2it) = 1/(2it) + zmp; Re{X/(2it)} -> Im X'(0)/2 with X(0) real
        h = 1e-4
        dX = (X(h) - X(-h)) / (2 * h)
        term3 = -2 * (complex(zeta_minus_pole(1.0)).real * X(0.0).real + dX.imag / 2)
    total = float(pair + term3)
    return MainTerms(term1, term2, float(term3), total, term1 is None)


class OutOfScope(ValueError):
    pass


def shift_case(delta: float, t: float, K: float, B: float = 4.0, C: float = 1.0, A: float = 1.0) -> str:
    """Which of the three (delta, t) regimes of the mollified moment a shift lies in.

    Only regime "I" is handled; "II" and "III" raise OutOfScope (they need the
    separate treatment of Conrey and Soundararajan).
    """
    lk = math.log(K)
    llk = math.log(lk)
    small = C / (lk * llk)
    big = C * llk / lk
    if -B / lk <= delta <= big and abs(delta) >= small and small <= abs(t) <= big:
        return "I"
    if abs(delta) <= small:
        raise OutOfScope("regime II (small delta): out of scope, see Conrey-Soundararajan")
    if A / lk <= abs(delta) <= big and abs(t) <= small:
        raise OutOfScope("regime III (small t): out of scope, see Conrey-Soundararajan")
    raise OutOfScope("shift outside all three regimes")


def case_one_grid(K: float, n: int = 5, B: float = 4.0, C: float = 1.0) -> list[tuple[float, float]]:
    """An n x n grid of (delta, t) inside regime I (positive t)."""
    lk = math.log(K)
    llk = math.log(lk)
    small, big = C / (lk * llk), C * llk / lk
    ds = np.linspace(small, big, n)
    ts = np.linspace(small, big, n)
    grid = [(float(d), float(t)) for d in ds for t in ts]
    for d, t in grid:
        shift_case(d, t, K, B, C)
    return grid


@dataclass
class MomentLHS:
    value: float
    weights: list
    forms: int


def twisted_moment_lhs(ell: int, delta: float, t: float, K: float, Phi: SmoothBump | None = None,
                       method: str = "afe") -> MomentLHS:
    """sum_{k = 2 (4)} Phi((k-1)/K) sum_f omega_f lambda_f(ell) |L(1/2+delta+it, f)|^2."""
    Phi = Phi if Phi is not None else SmoothBump()
    if K > 40:
        raise ValueError("K <= 40 only")
    if method not in ("afe", "direct"):
        raise ValueError("method is 'afe' or 'direct'")
    ks = [k for k in range(12, int(Phi.hi * K) + 3)
          if k % 4 == 2 and dim_cusp(k) and Phi((k - 1) / K) > 0]
    total = 0.0
    count = 0
    for k in ks:
        inner = 0.0
        for f in hecke_basis(k, 600):
            if method == "afe":
                l2 = l_squared_afe(f, delta, t)
            else:
                l2 = abs(CompletedLFunction(f).L(0.5 + delta + 1j * t)) ** 2
            inner += f.omega * f.lam[ell] * l2
            count += 1
        total += float(Phi((k - 1) / K)) * inner
    return MomentLHS(float(total), ks, count)


# ---------------------------------------------------------------------------
# Lemma: the T Euler product


def _nu(alpha: complex, beta: complex, ell: int) -> complex:
    return eta((alpha - beta) / 2, ell) / ell ** ((alpha + beta) / 2)


@dataclass
class TComparison:
    double_sum: complex
    closed_form: complex
    sum_tail: float
    product_tail: float

    @property
    def gap(self) -> float:
        return abs(self.double_sum - self.closed_form)

    @property
    def agrees(self) -> bool:
        return self.gap <= self.sum_tail + self.product_tail


def euler_product_T(alpha: complex, beta: complex, s: complex, r: int, z: complex,
                    X: int = 100000, P: int = 100000) -> TComparison:
    """T_{(alpha,beta)}(s; r; z) from its defining double sum and from the
    closed form mu(r) G zeta(1+s+2z) / (zeta(1+s+z+alpha) zeta(1+s+z+beta)).

    The double sum is regrouped by m = l n (squarefree, coprime to r) and cut
    at m <= X; G is a product over p <= P.
    """
    alpha, beta, s, z = complex(alpha), complex(beta), complex(s), complex(z)
    ar = ArithmeticTable(max(X, P))
    mu_r = int(ar.mu[r]) if r <= ar.N else int(ArithmeticTable(r).mu[r])
    w = 1 + s + z
    sig = w.real
    a = max(0.0, -z.real, -alpha.real, -beta.real)
    if sig - a <= 1.05:
        raise ValueError("outside the range of absolute convergence used here")

    # double sum: for squarefree m coprime to r the inner coefficient is
    # sum_{l n = m} mu(l) nu(l) n^{-z} = prod_{p | m} (p^{-z} - p^{-alpha} - p^{-beta})
    if mu_r == 0:
        double = 0j
    else:
        m = np.arange(1, X + 1)
        coef = np.where(ar.mu[1:X + 1] != 0, 1.0 + 0j, 0j)
        for p in ar.primes[ar.primes <= X]:
            pf = complex(p ** -z - p ** -alpha - p ** -beta)
            if r % p == 0:
                coef[p - 1::p] = 0
            else:
                coef[p - 1::p] *= pf
        double = mu_r * complex(np.sum((coef / m.astype(float) ** w)[::-1]))
    # coefficient <= 3^{omega(m)} m^a <= tau_3(m) m^a, and sum_{m<=x} tau_3 <= x (log x + 2)^2 / 2
    e = sig - a
    lx = math.log(X)
    # int_X^inf (log u + 2)^2 / 2 * e * u^{-e} du, closed form
    L2 = lx + 2
    tail_int = 0.5 * e * X ** (1 - e) * (L2 ** 2 / (e - 1) + 2 * L2 / (e - 1) ** 2 + 2 / (e - 1) ** 3)
    sum_tail = 0.0 if mu_r == 0 else tail_int

    if mu_r == 0:
        return TComparison(double, 0j, sum_tail, 0.0)
    logG = 0j
    for p in ar.primes[ar.primes <= P]:
        p = float(p)
        xa, xb, x2 = p ** -(w + alpha), p ** -(w + beta), p ** -(w + z)
        loc = (1 - x2) / ((1 - xa) * (1 - xb))
        if r % int(p):
            loc *= 1 - xa - xb + x2
        logG += np.log(loc)
    G = np.exp(logG)
    closed = mu_r * G * complex(zeta(w + z)) / (complex(zeta(w + alpha)) * complex(zeta(w + beta)))
    # each omitted local factor is 1 + O(x^2) with |x| <= p^{-(sig - a)}: |log G_p| <= 8 p^{-2(sig-a)}
    s2 = 2 * (sig - a)
    product_tail = abs(closed) * math.expm1(8 * P ** (1 - s2) / (s2 - 1))
    return TComparison(double, complex(closed), sum_tail, product_tail)
