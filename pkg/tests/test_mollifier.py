import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superpositivity.eigenforms import hecke_basis
from superpositivity.lfunction import CompletedLFunction
from superpositivity.mollifier import (DEFAULT, MollifiedSeries, MollifierParams, OutOfScope,
                                       case_one_grid, euler_product_T, f_cutoff, f_cutoff_split,
                                       inverse_coefficients, mollifier_value, shift_case,
                                       twisted_moment_lhs, twisted_moment_main)
from superpositivity.numerics import SmoothBump
from superpositivity.specialfn import ArithmeticTable, eta, zeta

from .conftest import moment_ratio

K = 30.0


def test_params():
    p = DEFAULT
    assert p.S == pytest.approx(math.pi / (4 * 0.36 * (1 - 2e-9)), rel=1e-15)
    assert p.d == pytest.approx(2 * p.S / 3)
    assert p.M_exponent == 1 - 5e-10
    assert (p.P(0.0), p.dP(0.0), p.P(p.upsilon), p.dP(p.upsilon)) == pytest.approx((0, 0, 1, 0), abs=1e-14)
    x = np.linspace(0, 1, 11)
    assert np.allclose(p.Q(x), 1 - p.P(p.upsilon + (1 - p.upsilon) * x), atol=1e-15)
    assert p.Q(0.0) == pytest.approx(0.0, abs=1e-15)


def test_cutoff_knots():
    M = DEFAULT.M(K)
    Y = DEFAULT.upsilon
    assert f_cutoff(M ** (1 - Y), M=M) == pytest.approx(1.0, abs=1e-14)
    assert f_cutoff(M, M=M) == pytest.approx(0.0, abs=1e-14)
    assert f_cutoff(M ** (1 - Y / 2), M=M) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        f_cutoff(2.0, M=5.0)


def test_cutoff_split_reconstruction():
    M = 1000.0
    x = np.geomspace(1, 2 * M, 400)
    assert np.max(np.abs(f_cutoff_split(x, M=M) - f_cutoff(x, M=M))) < 1e-13


@pytest.fixture(scope="module")
def f26():
    return hecke_basis(26, 400)[0]


@pytest.mark.parametrize("s", [0.5 + 0.3j, 1.1, 0.7 - 2j])
def test_mollifier_two_representations(f26, s):
    a, b = mollifier_value(f26, s, K)
    assert abs(a - b) < 1e-10


def test_mollifier_random_points(f26):
    rng = np.random.default_rng(5)
    for s in rng.uniform(0.3, 2, 10) + 1j * rng.uniform(-5, 5, 10):
        a, b = mollifier_value(f26, s, K)
        assert abs(a - b) < 1e-10 * max(1, abs(a))


def test_lm_near_one(f26):
    L = CompletedLFunction(f26).L(1.6)
    M, _ = mollifier_value(f26, 1.6, K)
    assert abs(L * M - 1) < 0.2


def test_x_coefficients():
    xs = MollifiedSeries(0.5 + 0.1j, DEFAULT.M(K))
    assert len(xs.x) == 30
    for ell in (4, 8, 9, 12, 18, 25, 27):
        assert xs[ell] == 0
    assert xs[31] == 0 and xs[100] == 0


def test_inverse_coefficients():
    M = DEFAULT.M(K)
    c = inverse_coefficients(300, K)
    assert c[1] == 1.0
    top = int(M ** (1 - DEFAULT.upsilon))
    assert np.all(c[2:top + 1] == 0)


def test_inverse_coefficients_convolution(f26):
    # Dirichlet convolution of lambda with a_f F(rad) reproduces lambda c
    N = 200
    M = DEFAULT.M(K)
    ar = ArithmeticTable(N)
    F = f_cutoff(np.arange(N + 1, dtype=float), M=M)
    a = np.zeros(N + 1)
    for m in range(1, N + 1):
        for q in range(1, int(math.isqrt(N // m)) + 1):
            if ar.mu[m] and ar.mu[q] and math.gcd(m, q) == 1:
                a[m * q * q] = ar.mu[m] * f26.lam[m] * F[m * q]
    lam = f26.lam
    conv = np.zeros(N + 1)
    for d in range(1, N + 1):
        conv[d::d] += a[d] * lam[1:N // d + 1]
    c = inverse_coefficients(N, K)
    assert np.max(np.abs(conv[1:] - lam[1:N + 1] * c[1:])) < 1e-12


def test_main_term_one():
    m = twisted_moment_main(1, 0.1, 0.0, K, check_range=False)
    assert m.term1.real == pytest.approx(zeta(1.2) * K / 4 * SmoothBump().integral(), rel=1e-12)
    assert m.term1.real == pytest.approx(0.29481024622773, rel=1e-12)


def test_main_term_range_checked():
    with pytest.raises(ValueError):
        twisted_moment_main(1, 0.1, 0.0, K)
    with pytest.raises(ValueError):
        twisted_moment_main(1, 0.0, 5.0, K)


def test_main_term_eta_ratio():
    t, d = 0.3, 0.005
    a = twisted_moment_main(6, d, t, K).term1
    b = twisted_moment_main(1, d, t, K).term1
    assert a / b == pytest.approx(eta(1j * t, 6).real / 6 ** (0.5 + d), rel=1e-12)


def test_main_term_continuous_across_zero():
    a = twisted_moment_main(3, 1e-5, 0.5, K).total
    b = twisted_moment_main(3, -1e-5, 0.5, K).total
    c = twisted_moment_main(3, 0.0, 0.5, K).total
    assert abs(a - b) <= 1e-4 * abs(c)
    assert abs(a - c) <= 1e-4 * abs(c)


def test_main_term_t_limit():
    at0 = twisted_moment_main(2, 0.004, 0.0, K).total
    gaps = [abs(twisted_moment_main(2, 0.004, t, K).total - at0) for t in (1e-3, 1e-4)]
    assert gaps[1] < gaps[0] / 50          # quadratic approach to the t = 0 limit
    assert gaps[1] < 1e-3 * abs(at0)


def test_main_term_delta_limit():
    # removable singularity at delta = 0: expected agreement 1e-4 relative.
    # The total has a genuine slope in delta (of size log K), so 1e-3 and 1e-5
    # differ by about 2.5e-3 relative at K = 30.  At ell = 1, t = 0 the total
    # itself vanishes like delta^2, so a nonzero t is used.
    a = twisted_moment_main(1, 1e-3, 0.5, K).total
    b = twisted_moment_main(1, 1e-5, 0.5, K).total
    assert abs(a - b) <= 1e-4 * abs(b)


def test_shift_regimes():
    K0 = 1e6
    for d, t in case_one_grid(K0, 3):
        assert shift_case(d, t, K0) == "I"
    with pytest.raises(OutOfScope, match="Conrey-Soundararajan"):
        shift_case(1e-6, 0.05, K0)
    with pytest.raises(OutOfScope, match="Conrey-Soundararajan"):
        shift_case(0.1, 1e-6, K0)


def test_lhs_validation():
    with pytest.raises(ValueError):
        twisted_moment_lhs(1, 0.01, 0.0, 60)


def test_lhs_afe_vs_direct_route():
    a = twisted_moment_lhs(1, 0.01, 0.2, 12.5, method="afe").value
    b = twisted_moment_lhs(1, 0.01, 0.2, 12.5, method="direct").value
    assert abs(a - b) < 1e-6 * abs(b)


@pytest.mark.slow
def test_lhs_ratio_k20():
    lhs, main = moment_ratio(20.0, 1, 0.01)
    assert 0.7 <= lhs / main <= 1.3


@pytest.mark.slow
def test_lhs_ell_ratio_tracks_eta():
    # expected within 20% of eta_{it}(2)/2^{1/2+delta}; that factor belongs to
    # the first main term only, the second and third carry other ell-dependence
    Kb, d, t = 40.0, 0.01, 0.0
    l2, _ = moment_ratio(Kb, 2, d, t)
    l1, _ = moment_ratio(Kb, 1, d, t)
    target = eta(1j * t, 2).real / 2 ** (0.5 + d)
    assert abs(l2 / l1 / target - 1) <= 0.2


@pytest.mark.slow
def test_lhs_ell_ratio_tracks_main_terms():
    l2, m2 = moment_ratio(40.0, 2, 0.01)
    l1, m1 = moment_ratio(40.0, 1, 0.01)
    assert abs((l2 / l1) / (m2 / m1) - 1) < 0.01


@pytest.mark.parametrize("r", [1, 6, 5])
def test_T_euler_product(r):
    c = euler_product_T(0.1, 0.1, 1.5, r, 0.1)
    assert c.agrees


def test_T_sign_for_r6():
    c6 = euler_product_T(0.1, 0.1, 1.5, 6, 0.1)
    c1 = euler_product_T(0.1, 0.1, 1.5, 1, 0.1)
    assert c6.closed_form.real * c1.closed_form.real > 0   # mu(6) = +1


def test_T_non_squarefree():
    c = euler_product_T(0.1, 0.1, 1.5, 4, 0.1)
    assert c.double_sum == 0 and c.closed_form == 0


def test_T_complex_shifts():
    assert euler_product_T(0.1 + 0.3j, -0.05 - 0.2j, 1.4 + 1j, 3, 0.2 + 0.1j).agrees


def test_T_convergence_guard():
    with pytest.raises(ValueError):
        euler_product_T(0.1, 0.1, -0.2, 1, 0.1)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 5000.0), st.floats(20.0, 1e4))
def test_cutoff_monotone_and_bounded(x, M):
    v = f_cutoff(x, M=M)
    assert 0.0 <= v <= 1.0
    assert f_cutoff(x * 1.01, M=M) <= v + 1e-15
