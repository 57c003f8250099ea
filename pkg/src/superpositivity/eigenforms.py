"""Level-one cusp forms: exact q-expansions and the Hecke eigenbasis.

q-expansions are kept as lists of Python integers and multiplied by
Kronecker substitution (pack into one big integer, multiply, unpack).  The
Victor-Miller basis, the Hecke operators T_2 and T_3 and their matrices are
exact; only the final diagonalization is numeric (mpmath, 60 digits, since the
basis coefficients cancel heavily).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

from .specialfn import bessel_j_integer, kloosterman


# ---------------------------------------------------------------------------
# exact q-series


def _pack(coeffs, nbytes):
    """Signed coefficient list -> integer sum c_i 2^{8 nbytes i}."""
    off = 1 << (8 * nbytes - 1)
    raw = b"".join((c + off).to_bytes(nbytes, "little") for c in coeffs)
    offset = int.from_bytes(off.to_bytes(nbytes, "little") * len(coeffs), "little")
    return int.from_bytes(raw, "little") - offset


def _unpack(value, nbytes, count):
    off = 1 << (8 * nbytes - 1)
    offset = int.from_bytes(off.to_bytes(nbytes, "little") * count, "little")
    raw = (value + offset).to_bytes(nbytes * count + 1, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") - off for i in range(count)]


def series_mul(a: list[int], b: list[int], N: int) -> list[int]:
    """Product of two integer q-series truncated to q^0..q^{N-1}."""
    a = a[:N]
    b = b[:N]
    if not a or not b:
        return [0] * N
    bound = max(1, max(abs(x) for x in a)) * max(1, max(abs(x) for x in b)) * min(len(a), len(b))
    nbytes = (bound.bit_length() + 2) // 8 + 1
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    out = _unpack(prod, nbytes, len(a) + len(b) - 1)[:N]
    return out + [0] * (N - len(out))


def series_pow(a: list[int], e: int, N: int) -> list[int]:
    result = [1] + [0] * (N - 1)
    base = a[:N]
    while e:
        if e & 1:
            result = series_mul(result, base, N)
        e >>= 1
        if e:
            base = series_mul(base, base, N)
    return result


def _sigma(k: int, N: int) -> list[int]:
    s = [0] * N
    for d in range(1, N):
        dk = d ** k
        for m in range(d, N, d):
            s[m] += dk
    return s


@dataclass(frozen=True)
class QExpansion:
    """Integer q-expansion of a weight-k modular form, coefficients of q^0..q^{N-1}."""

    weight: int
    coeffs: tuple

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __mul__(self, other: "QExpansion") -> "QExpansion":
        N = min(self.N, other.N)
        return QExpansion(self.weight + other.weight,
                          tuple(series_mul(list(self.coeffs), list(other.coeffs), N)))

    def __pow__(self, e: int) -> "QExpansion":
        return QExpansion(self.weight * e, tuple(series_pow(list(self.coeffs), e, self.N)))

    def __sub__(self, other):
        if self.weight != other.weight:
            raise ValueError("weights differ")
        N = min(self.N, other.N)
        return QExpansion(self.weight, tuple(a - b for a, b in zip(self.coeffs[:N], other.coeffs[:N])))


def eisenstein(k: int, N: int) -> QExpansion:
    """E_4 = 1 + 240 sum sigma_3(n) q^n or E_6 = 1 - 504 sum sigma_5(n) q^n, to q^{N-1}."""
    if k not in (4, 6):
        raise ValueError("only E_4 and E_6 are provided")
    if N > 10 ** 5:
        raise ValueError("N too large")
    c = 240 if k == 4 else -504
    s = _sigma(k - 1, N)
    return QExpansion(k, tuple([1] + [c * s[n] for n in range(1, N)]))


def delta(N: int) -> QExpansion:
    """Delta = (E_4^3 - E_6^2)/1728, to q^{N-1}."""
    e4, e6 = eisenstein(4, N), eisenstein(6, N)
    diff = (e4 ** 3) - (e6 ** 2)
    out = []
    for c in diff.coeffs:
        q, r = divmod(c, 1728)
        if r:
            raise ArithmeticError("E4^3 - E6^2 not divisible by 1728")
        out.append(q)
    return QExpansion(12, tuple(out))


def delta_product(N: int) -> QExpansion:
    """Delta = q prod (1 - q^n)^24 (independent construction)."""
    # Euler's pentagonal theorem for prod (1 - q^n)
    eta = [0] * N
    m = 0
    while True:
        done = True
        for g in (m * (3 * m - 1) // 2, m * (3 * m + 1) // 2) if m else (0,):
            if g < N:
                eta[g] = -1 if m % 2 else 1
                done = False
        if done and m:
            break
        m += 1
    p24 = series_pow(eta, 24, N)
    return QExpansion(12, tuple([0] + p24[:N - 1]))


# ---------------------------------------------------------------------------
# spaces and Hecke operators


def dim_cusp(k: int) -> int:
    """dim S_k(SL_2(Z)) for even k >= 0."""
    if k % 2 or k < 0:
        return 0
    if k < 12:
        return 0
    return k // 12 - (1 if k % 12 == 2 else 0)


@lru_cache(maxsize=64)
def victor_miller_basis(k: int, N: int) -> tuple[tuple[int, ...], ...]:
    """Integer basis g_1..g_d of S_k with g_j = q^j + O(q^{d+1}), coefficients q^0..q^{N-1}."""
    d = dim_cusp(k)
    if d == 0:
        return ()
    e4 = list(eisenstein(4, N).coeffs)
    e6 = list(eisenstein(6, N).coeffs)
    dl = list(delta(N).coeffs)
    mons = []
    for j in range(1, d + 1):
        rest = k - 12 * j
        # rest = 4a + 6b with b in {0, 1}
        b = 0 if rest % 4 == 0 else 1
        a = (rest - 6 * b) // 4
        f = series_pow(dl, j, N)
        if a:
            f = series_mul(f, series_pow(e4, a, N), N)
        if b:
            f = series_mul(f, e6, N)
        mons.append(f)
    # echelonize: each mons[j] = q^{j+1} + ...; clear the coefficients of q^{i+1}, i > j
    for j in range(d - 1, -1, -1):
        for i in range(j + 1, d):
            c = mons[j][i + 1]
            if c:
                mons[j] = [x - c * y for x, y in zip(mons[j], mons[i])]
    return tuple(tuple(m) for m in mons)


def _coeffs_in_basis(series, basis):
    """Exact coordinates of an integer cusp form in the echelon basis."""
    return [series[j + 1] for j in range(len(basis))]


def hecke_matrix(k: int, p: int, N: int) -> list[list[int]]:
    """Exact matrix of T_p on the Victor-Miller basis (columns = images)."""
    basis = victor_miller_basis(k, N)
    d = len(basis)
    if (d + 1) * p > N:
        raise ValueError("not enough coefficients for T_p")
    cols = []
    for g in basis:
        img = [0] * (d + 1)
        for n in range(1, d + 1):
            img[n] = g[p * n] + (p ** (k - 1) * g[n // p] if n % p == 0 else 0)
        cols.append(_coeffs_in_basis(img, basis))
    return [[cols[j][i] for j in range(d)] for i in range(d)]


# ---------------------------------------------------------------------------
# eigenforms


@dataclass
class HeckeEigenform:
    """Normalized Hecke eigenform of level one.

    ``lam[n]`` is lambda_f(n) = a(n)/n^{(k-1)/2} for 1 <= n < N (``lam[0]`` = 0).
    """

    weight: int
    lam: np.ndarray
    index: int = 0
    provenance: str = "exact-integer"
    omega: float | None = None
    _sym2: float | None = field(default=None, repr=False)

    @property
    def epsilon(self) -> int:
        return 1 if self.weight % 4 == 0 else -1

    @property
    def N(self) -> int:
        return len(self.lam)

    @property
    def label(self) -> str:
        return f"{self.weight}.{self.index}"

    def a(self, n):
        """Unnormalized coefficient a(n) = lambda(n) n^{(k-1)/2} (float)."""
        return self.lam[n] * np.asarray(n, dtype=float) ** ((self.weight - 1) / 2)

    @property
    def sym2_at_1(self) -> float:
        """L(1, sym^2 f) = 12 zeta(2)/((k-1) omega_f)."""
        if self.omega is None:
            raise ValueError("harmonic weight not computed")
        return 12 * (math.pi ** 2 / 6) / ((self.weight - 1) * self.omega)


_DIAG_DPS = 60


@lru_cache(maxsize=64)
def _eigen_data(k: int, N: int):
    basis = victor_miller_basis(k, N)
    d = len(basis)
    if d == 0:
        raise ValueError(f"S_{k} is zero")
    if d == 1:
        return [(list(basis[0]), "exact-integer")]
    T2 = hecke_matrix(k, 2, max(N, 2 * d + 2))
    with mp.workdps(_DIAG_DPS):
        A = mp.matrix(T2)
        evals, evecs = mp.eig(A)
        order = sorted(range(d), key=lambda i: float(mp.re(evals[i])))
        scale = max(abs(e) for e in evals)
        for i in range(d):
            for j in range(i):
                if abs(evals[order[i]] - evals[order[j]]) < 1e-6 * scale:
                    raise ArithmeticError(f"repeated T_2 eigenvalue in weight {k}")
        forms = []
        for i in order:
            v = [mp.re(evecs[r, i]) for r in range(d)]
            v = [x / v[0] for x in v]            # a(1) = coordinate on g_1
            coeffs = [mp.fsum(v[j] * basis[j][n] for j in range(d)) for n in range(N)]
            forms.append((coeffs, "numeric-diagonalization"))
    return forms


def hecke_basis(k: int, N: int = 1000, with_weights: bool = True) -> list[HeckeEigenform]:
    """Hecke eigenforms of S_k, sorted by lambda(2) ascending.

    ``N`` is the number of coefficients kept (n < N).
    """
    if k % 2 or k < 12 or k > 130:
        raise ValueError("weight must be even with 12 <= k <= 130")
    if N < max(8, 2 * dim_cusp(k) + 4) or N > 20000:
        raise ValueError("coefficient count out of range")
    forms = []
    for idx, (coeffs, prov) in enumerate(_eigen_data(k, N)):
        with mp.workdps(_DIAG_DPS):
            half = mp.mpf(k - 1) / 2
            lam = np.zeros(N)
            lam[1:] = [float(mp.mpf(coeffs[m]) / mp.mpf(m) ** half) for m in range(1, N)]
        forms.append(HeckeEigenform(k, lam, idx, prov))
    if with_weights:
        harmonic_weights(forms)
    return forms


def integer_coefficients(k: int, N: int, index: int = 0) -> list[int]:
    """Exact integer a(n) for one-dimensional spaces."""
    data = _eigen_data(k, N)
    if len(data) != 1:
        raise ValueError("exact integer coefficients only in dimension one")
    return list(data[0][0])


# ---------------------------------------------------------------------------
# harmonic weights


def petersson_offdiagonal(k: int, m: int, n: int, tol: float = 1e-16) -> tuple[float, float]:
    """2 pi i^{-k} sum_c S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c), with a tail bound.

    The c-sum stops once the series bound for the remaining terms,
    sum_{c > C} tau(c) sqrt(c) ... is below ``tol`` (bounded crudely by
    c (x/2)^{k-1}/(k-1)! with x = 4 pi sqrt(mn)/c, summed geometrically).
    """
    sign = 1 if k % 4 == 0 else -1          # i^{-k}
    x0 = 4 * math.pi * math.sqrt(m * n)
    total = 0.0
    c = 0
    lgk = math.lgamma(k)
    while True:
        c += 1
        x = x0 / c
        total += kloosterman(m, n, c) / c * bessel_j_integer(k - 1, x)
        # |S| <= c, |J_{k-1}(x)| <= (x/2)^{k-1}/(k-1)!; terms decay like c^{-(k-1)}
        if x < 1.0:
            term = math.exp((k - 1) * math.log(x / 2) - lgk)
            tail = 2 * math.pi * term * c / (k - 3)
            if tail < tol:
                break
        if c > 10 ** 6:
            raise RuntimeError("Petersson c-sum did not converge")
    return 2 * math.pi * sign * total, tail


def harmonic_weights(forms: list[HeckeEigenform], pairs=None) -> np.ndarray:
    """Solve the Petersson relations for omega_f over one weight space.

    Dimension one uses (m, n) = (1, 1) unless ``pairs`` is given; higher
    dimension uses least squares over pairs (m, n) with m <= n <= d + 2.
    The weights are stored on the forms and returned.
    """
    k = forms[0].weight
    d = len(forms)
    if d != dim_cusp(k):
        raise ValueError("need the full eigenbasis of one weight")
    if d > 12:
        raise ValueError("dimension too large for the Petersson solve")
    if pairs is None:
        pairs = [(1, 1)] if d == 1 else [(m, n) for m in range(1, d + 3) for n in range(m, d + 3)]
    A = np.array([[f.lam[m] * f.lam[n] for f in forms] for m, n in pairs])
    b = np.array([(1.0 if m == n else 0.0) + petersson_offdiagonal(k, m, n)[0] for m, n in pairs])
    cond = np.linalg.cond(A) if d > 1 else 1.0
    if cond > 1e8:
        raise ArithmeticError(f"Petersson system ill-conditioned (cond {cond:.2e})")
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ w - b)))
    if resid > 1e-8:
        raise ArithmeticError(f"Petersson least-squares residual {resid:.2e}")
    for f, om in zip(forms, w):
        f.omega = float(om)
    return w


# ---------------------------------------------------------------------------
# families and export


@dataclass
class HarmonicFamily:
    """Eigenforms with K <= k <= 2K in one residue class mod 4."""

    K: float
    parity: int                  # 2 for k = 2 mod 4, 0 for k = 0 mod 4
    forms: list = field(default_factory=list)

    @classmethod
    def build(cls, K: float, parity: int = 2, N: int = 400, weights=None):
        if parity not in (0, 2):
            raise ValueError("parity must be 0 or 2")
        ks = weights if weights is not None else [
            k for k in range(12, int(2 * K) + 1) if k >= K and k % 4 == parity and dim_cusp(k)]
        forms = []
        for k in ks:
            if not (K <= k <= 2 * K) or k % 4 != parity:
                raise ValueError(f"weight {k} not in the family")
            forms.extend(hecke_basis(k, N))
        return cls(K, parity, forms)


CSV_COLUMNS = ("k", "form", "n", "lambda", "omega")


def to_csv(forms: list[HeckeEigenform], num_coeffs: int) -> str:
    """CSV rows (k, form, n, lambda, omega) for n = 1..num_coeffs; floats in repr form."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for f in forms:
        for n in range(1, num_coeffs + 1):
            w.writerow([f.weight, f.index, n, repr(float(f.lam[n])),
                        repr(float(f.omega)) if f.omega is not None else ""])
    return buf.getvalue()


def from_csv(text: str) -> dict:
    """Parse ``to_csv`` output into {(k, form): (lambda array from n=1, omega)}."""
    out = {}
    rows = csv.DictReader(io.StringIO(text))
    for r in rows:
        key = (int(r["k"]), int(r["form"]))
        lam, om = out.setdefault(key, ([], float(r["omega"]) if r["omega"] else None))
        lam.append(float(r["lambda"]))
    return {key: (np.array(lam), om) for key, (lam, om) in out.items()}
