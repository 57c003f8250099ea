"""The limiting mollified moment V(u, v) and the zero-density constants built from it.

V(u, v) is evaluated with a fixed composite Gauss-Legendre rule in x on
[0, Upsilon]; 64 panels of 20 nodes resolve the exponentials and the
oscillation e^{2iv(1-x)} for |u|, |v| <= 400.  Everything is computed as
V - 1 so that log V keeps its precision when V - 1 is far below 1e-16.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .certify import SelbergBox
from .mollifier import DEFAULT, MollifierParams
from .numerics import integrate

_SMALL = 1e-4      # below this |u| or |v| the merged forms are used
_BATCH = 256
_RANGE = 400.0     # the N_0 integral runs to u - R = 396


class SingularPoint(ValueError):
    pass


def _gl_nodes(a, b, panels, nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    e = np.linspace(a, b, panels + 1)
    h = 0.5 * np.diff(e)
    m = e[:-1] + h
    return (m[:, None] + h[:, None] * x).ravel(), (h[:, None] * w).ravel()


def _poly_derivs_at_zero(coeffs):
    """{j: p^{(j)}(0)} for j >= 2."""
    return {j: math.factorial(j) * c for j, c in enumerate(coeffs) if j >= 2 and c != 0}


class ScriptV:
    """V(u, v) = V1 + V2 + V3 for a mollifier parameter set."""

    def __init__(self, params: MollifierParams = DEFAULT, panels: int = 64, nodes: int = 20):
        self.params = params
        Y = params.upsilon
        self.a = params.M_exponent
        P = np.polynomial.Polynomial(params.P_coeffs)
        Q = 1 - P(np.polynomial.Polynomial([Y, 1 - Y]))
        self._P, self._Q = P, Q
        x, w = _gl_nodes(0.0, Y, panels, nodes)
        self.x, self.w = x, w
        self.P0 = P(x)
        self.P1 = P.deriv(1)(x)
        self.P2 = P.deriv(2)(x)
        self.P3 = P.deriv(3)(x)
        self.Pj0 = _poly_derivs_at_zero(P.coef)
        self.Qj0 = _poly_derivs_at_zero(Q.coef)

    # sums over j >= 2 of p^{(j)}(0) / z^j
    def _SP(self, w):
        z = -2 * w * self.a
        return sum(c / z ** j for j, c in self.Pj0.items())

    def _SQ(self, w):
        z = -2 * w * self.a * (1 - self.params.upsilon)
        return sum(c / z ** j for j, c in self.Qj0.items())

    def _q(self, f):
        return f @ self.w

    def _u_limit(self, v):
        """lim_{u -> 0} (I11 - e^{-4u} IA) / (2ua) for v != 0."""
        a = self.a
        g = 4 * self.P1 ** 2 + self.P1 * self.P2 / (v[:, None] ** 2 * a)
        return self._q(g) / (2 * a)

    def _parts(self, u, v):
        """Arrays (V1 - 1, V2, V31, V3 - V31).

        For |u| < 1e-4 the 1/u piece of V2 is moved into V1 and the pair is
        evaluated in merged form.

        u, v are 1-d arrays of equal length.
        """
        a, Y = self.a, self.params.upsilon
        P0, P1, P2, P3 = self.P0, self.P1, self.P2, self.P3
        x = self.x
        uc, vc = u[:, None], v[:, None]
        w = u + 1j * v
        wc = w[:, None]
        E = np.exp(-2 * uc * (1 - x) * a)
        A = (1j * vc / wc) * P1 + uc / (2 * wc ** 2 * a) * P2 - uc / (4 * wc ** 3 * a ** 2) * P3
        C = P2 / (2 * wc ** 2 * a) - P3 / (4 * wc ** 3 * a ** 2)
        B = (uc / wc) * P1 + 1j * vc * C
        I11 = self._q(E * P1 ** 2)
        IA = self._q(E * np.abs(A) ** 2)

        small_u = np.abs(u) < _SMALL
        with np.errstate(divide="ignore", invalid="ignore"):
            v1m = I11 / (2 * u * a)
            t1 = -IA / (2 * u * a)
        if small_u.any():
            v1m[small_u] = self._small_u_pair(u[small_u], v[small_u])
            t1[small_u] = 0.0

        SPw, SPwb, SQw = self._SP(w), self._SP(np.conj(w)), self._SQ(w)
        t2 = 2 * (np.exp(-2 * a * np.conj(w)) * SPwb
                  * self._q(np.exp(-2j * vc * (1 - x) * a) * A)).real
        t3 = (np.exp(2 * u * a * (1 - Y) - 4 * u * a) - np.exp(-2 * u * a)) * np.abs(SPw) ** 2
        comb = np.exp(-2 * w * a) * SPw + np.exp(-2 * w * a * (1 - Y)) * SQw
        t4 = -np.expm1(2 * u * a * (1 - Y)) * np.abs(comb) ** 2
        v2 = np.exp(-4 * u) * (t1 + t2 + t3 + t4)

        # s1 = int E g B / (-2iva) split into a regular part and the 1/v part (V31)
        reg1 = self._q(E * P0 * B) + self._q(E * P1 * C) / (-2 * a)
        g = -2j * vc * a * P0 + P1
        s2 = np.exp(-2 * w * a) * SPw * self._q(np.exp(2j * vc * (1 - x) * a) * g)
        s3 = (1 - np.exp(2j * v * (1 - Y) * a)) * comb
        v3r = -2 * (np.exp(-2 * w) * (reg1 + s2 + s3)).real
        v31 = (I11 / a) * self._im_over_v(u, v)
        return v1m, v2, v31, v3r

    def _small_u_pair(self, u, v):
        if np.any(np.abs(v) < _SMALL):
            raise SingularPoint("u + iv too close to 0")
        # quadratic through the exact limit at 0 and direct values at +-_SMALL
        lim = self._u_limit(v)
        h = np.full_like(u, _SMALL)
        fp = self._direct_pair(h, v)
        fm = self._direct_pair(-h, v)
        c1 = (fp - fm) / (2 * _SMALL)
        c2 = (fp + fm - 2 * lim) / (2 * _SMALL ** 2)
        return lim + c1 * u + c2 * u ** 2

    def _direct_pair(self, u, v):
        a = self.a
        uc, vc = u[:, None], v[:, None]
        wc = (u + 1j * v)[:, None]
        E = np.exp(-2 * uc * (1 - self.x) * a)
        A = (1j * vc / wc) * self.P1 + uc / (2 * wc ** 2 * a) * self.P2 - uc / (4 * wc ** 3 * a ** 2) * self.P3
        return (self._q(E * self.P1 ** 2) - np.exp(-4 * u) * self._q(E * np.abs(A) ** 2)) / (2 * u * a)

    @staticmethod
    def _im_over_v(u, v):
        """Im F(u + iv) / v with F(w) = u e^{-2w} / w; series in v near v = 0."""
        out = np.empty_like(u)
        big = np.abs(v) >= _SMALL
        w = u[big] + 1j * v[big]
        out[big] = (u[big] * np.exp(-2 * w) / w).imag / v[big]
        sm = ~big
        if sm.any():
            us, vs = u[sm], v[sm]
            if np.any(np.abs(us) < _SMALL):
                raise SingularPoint("u + iv too close to 0")

            def dn(n):  # n-th derivative of e^{-2w}/w at w = us
                return sum(math.comb(n, k) * (-2.0) ** (n - k) * (-1) ** k * math.factorial(k)
                           * us ** (-1.0 - k) for k in range(n + 1)) * np.exp(-2 * us)

            out[sm] = us * (dn(1) - vs ** 2 * dn(3) / 6)
        return out

    def _eval(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        shape = u.shape
        u, v = u.ravel(), v.ravel()
        if np.any(np.abs(u) > _RANGE) or np.any(np.abs(v) > _RANGE):
            raise ValueError(f"need |u|, |v| <= {_RANGE:g}")
        if np.any(np.hypot(u, v) < _SMALL):
            raise SingularPoint("u + iv too close to 0")
        parts = [np.empty(u.size) for _ in range(4)]
        for i in range(0, u.size, _BATCH):
            for dst, src in zip(parts, self._parts(u[i:i + _BATCH], v[i:i + _BATCH])):
                dst[i:i + _BATCH] = src
        if not shape:
            return [float(p[0]) for p in parts]
        return [p.reshape(shape) for p in parts]

    def components(self, u, v):
        """(V1, V2, V3).  For |u| < 1e-4 the two 1/u pieces are merged into V1."""
        v1m, v2, v31, v3r = self._eval(u, v)
        return 1 + v1m, v2, v31 + v3r

    def split_v3(self, u, v):
        """(V31, V3 - V31): the 1/v part of V3 and the remainder."""
        _, _, v31, v3r = self._eval(u, v)
        return v31, v3r

    def minus_one(self, u, v):
        """V(u, v) - 1, computed without forming V."""
        v1m, v2, v31, v3r = self._eval(u, v)
        return v1m + v2 + v31 + v3r

    def log(self, u, v):
        m = self.minus_one(u, v)
        if np.any(np.asarray(m) <= -1):
            raise ArithmeticError("V(u, v) <= 0")
        return np.log1p(m)

    def __call__(self, u, v):
        return 1 + self.minus_one(u, v)


_CACHE: dict = {}


def _script(params: MollifierParams) -> ScriptV:
    if params not in _CACHE:
        _CACHE[params] = ScriptV(params)
    return _CACHE[params]


def script_v(u, v, params: MollifierParams = DEFAULT):
    return _script(params)(u, v)


# ---------------------------------------------------------------------------
# large-u bound


@dataclass
class LemmaScan:
    worst_slack: float
    worst_point: tuple
    slacks: dict


def lemma_vl_scan(params: MollifierParams = DEFAULT, grid=None) -> LemmaScan:
    """Check V1 <= 1 + e^{-u/2}/2, V2 <= e^{-4u}, V3 <= e^{-2u}, V <= 1 + e^{-u/2}
    and |V31|, |V3 - V31| <= e^{-2u}/2 at every grid point.

    Slacks are relative to the allowed excess: (bound - value) / excess.
    """
    if grid is None:
        grid = wedge_grid(40)
    grid = [(float(u), float(v)) for u, v in grid]
    for u, v in grid:
        if not (10 <= u <= 60 and abs(v) <= 5 * u):
            raise ValueError("grid must lie in u in [10, 60], |v| <= 5u")
    sv = _script(params)
    u = np.array([p[0] for p in grid])
    v = np.array([p[1] for p in grid])
    v1m, v2, v31, v3r = sv._eval(u, v)
    e2, e4, eh = np.exp(-2 * u), np.exp(-4 * u), np.exp(-u / 2)
    slacks = {
        "V1": (eh / 2 - v1m) / (eh / 2),
        "V2": (e4 - v2) / e4,
        "V3": (e2 - (v31 + v3r)) / e2,
        "V": (eh - (v1m + v2 + v31 + v3r)) / eh,
        "V31": (e2 / 2 - np.abs(v31)) / (e2 / 2),
        "V32": (e2 / 2 - np.abs(v3r)) / (e2 / 2),
    }
    worst, where = math.inf, None
    for arr in slacks.values():
        i = int(np.argmin(arr))
        if arr[i] < worst:
            worst, where = float(arr[i]), grid[i]
    return LemmaScan(worst, where, {k: float(np.min(a)) for k, a in slacks.items()})


def wedge_grid(n: int = 40):
    """n x n points: u in [10, 60], v in [-5u, 5u]."""
    us = np.linspace(10, 60, n)
    return [(float(u), float(s * 5 * u)) for u in us for s in np.linspace(-1, 1, n)]


# ---------------------------------------------------------------------------
# N_0 and N_j


@dataclass
class BoundResult:
    value: float
    pieces: dict
    error_budget: float
    asymptotic: bool = True


def _vec(f):
    return lambda x: f(np.asarray(x, dtype=float))


def n0_bound(params: MollifierParams = DEFAULT, tol: float = 1e-12, U: float = 400.0) -> BoundResult:
    """N_0/A <= (int_0^S cos(pi t/2S) log V(-R, t) dt
                 + int_0^inf sinh(pi u/2S) log V(u - R, S) du) / (8 S sinh(pi R/2S)) - 1/2.

    The second integrand decays like u^{-4}; it is integrated to U and the rest
    is C U^{-3}/3 with C fitted on [U/10, U].
    """
    sv = _script(params)
    S, R = params.S, params.R
    k = math.pi / (2 * S)
    J1 = integrate(_vec(lambda t: np.cos(k * t) * sv.log(-R, t)), 0.0, S, tol=tol)
    f = _vec(lambda u: np.sinh(k * u) * sv.log(u - R, S))
    J2 = integrate(f, 0.0, U, tol=tol, points=[R], initial_panels=64)
    us = np.geomspace(U / 10, U, 41)
    C_fit, *_ = np.linalg.lstsq((us ** -4.0)[:, None], f(us), rcond=None)
    C = float(C_fit[0])
    tail = C / (3 * U ** 3)
    C_end = float(f(np.array([U]))[0] * U ** 4)
    tail_spread = abs(C_end - C) / (3 * U ** 3)
    den = 8 * S * math.sinh(math.pi * R / (2 * S))
    value = (J1.value + J2.value + tail) / den - 0.5
    budget = (J1.error_estimate + J2.error_estimate + tail_spread) / den
    return BoundResult(value, {"J1": J1.value, "J2": J2.value, "tail": tail, "C": C}, budget)


def nj_bound(j: int, params: MollifierParams = DEFAULT, tol: float = 1e-12, U: float = 400.0) -> BoundResult:
    """N_j/A bound: box parameters W_{0,j} = 1/2 + (jd/2)/log K, H_j = 3(j+1)d/(2 log K)."""
    if not (isinstance(j, (int, np.integer)) and 1 <= j <= 40):
        raise ValueError("need integer 1 <= j <= 40")
    sv = _script(params)
    d = params.d
    L = 3 * (j + 1) * d
    u0 = j * d / 2
    a1 = integrate(_vec(lambda t: np.cos(math.pi * t / L) * sv.log(u0, t)), 0.0, L / 2, tol=tol)
    f = _vec(lambda u: np.sinh(math.pi * u / L) * sv.log(u + u0, L / 2))
    U = min(U, _RANGE - u0)
    a2 = integrate(f, 0.0, U, tol=tol, initial_panels=64, tol_abs=1e-300)
    last = abs(float(f(np.array([U]))[0]))
    den = 6 * (j + 1) * d * math.sinh(math.pi * j / (6 * (j + 1)))
    # integrand decays at least like e^{-(2(1-Y) - pi/L) u}
    rate = 2 * (1 - params.upsilon) * params.M_exponent - math.pi / L
    tail = last / rate if rate > 0 else math.inf
    return BoundResult((a1.value + a2.value) / den, {"a1": a1.value, "a2": a2.value},
                       (a1.error_estimate + a2.error_estimate + tail) / den)


# ---------------------------------------------------------------------------
# totals


@dataclass
class ConstantsReport:
    n0: float
    nj: dict
    sum_4_13: float
    tail: float
    total: float
    proportion: float
    hough_term: float = 0.0
    hough_asymptotic: bool = True
    error_budget: float = 0.0
    params: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["nj"] = {str(k): v for k, v in self.nj.items()}
        return out


def closed_tail(params: MollifierParams = DEFAULT, start: int = 14) -> float:
    """(3/5) sum_{j >= start} e^{-dj/4}."""
    d = params.d
    return 0.6 * math.exp(-start * d / 4) / -math.expm1(-d / 4)


def tail_and_total(params: MollifierParams = DEFAULT, tol: float = 1e-12) -> ConstantsReport:
    n0 = n0_bound(params, tol)
    nj = {j: nj_bound(j, params, tol) for j in range(1, 14)}
    tail = closed_tail(params)
    total = n0.value + sum(r.value for r in nj.values()) + tail
    budget = n0.error_budget + sum(r.error_budget for r in nj.values())
    return ConstantsReport(
        n0=n0.value, nj={j: r.value for j, r in nj.items()},
        sum_4_13=sum(nj[j].value for j in range(4, 14)), tail=tail, total=total,
        proportion=1 - total, error_budget=budget, params=asdict(params))


@dataclass
class CountingRegions:
    """Boxes B_j with vertices W_{0,j} +- iH_j, W_1 +- iH_j covering the regions
    {beta >= 1/2 + jd/log K, |gamma| <= (j+1)d/log K}."""

    K: float
    params: MollifierParams = DEFAULT
    J: int = 14
    W1: float = 2.0

    def box(self, j: int) -> SelbergBox:
        if not 1 <= j <= self.J - 1:
            raise ValueError("need 1 <= j <= J-1")
        lk = math.log(self.K)
        d = self.params.d
        return SelbergBox(0.5 + (j * d / 2) / lk, self.W1, 1.5 * (j + 1) * d / lk)

    def region_contains(self, j: int, s: complex) -> bool:
        lk = math.log(self.K)
        d = self.params.d
        return s.real >= 0.5 + j * d / lk and abs(s.imag) <= (j + 1) * d / lk and s.real <= self.W1

    def nested(self, samples: int = 200, seed: int = 0) -> bool:
        """Random points of each region lie in the matching box."""
        rng = np.random.default_rng(seed)
        lk = math.log(self.K)
        d = self.params.d
        for j in range(1, self.J):
            lo = 0.5 + j * d / lk
            if lo >= self.W1:
                continue
            re = rng.uniform(lo, self.W1, samples)
            im = rng.uniform(-(j + 1) * d / lk, (j + 1) * d / lk, samples)
            b = self.box(j)
            if not all(b.contains(complex(x, y)) for x, y in zip(re, im)):
                return False
        return True
