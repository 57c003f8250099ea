import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superpositivity.eigenforms import (CSV_COLUMNS, HarmonicFamily, delta, delta_product,
                                        dim_cusp, eisenstein, from_csv, hecke_basis, hecke_matrix,
                                        integer_coefficients, to_csv, victor_miller_basis)

from .conftest import form


def test_eisenstein_coefficients():
    assert eisenstein(4, 10)[1] == 240
    assert eisenstein(6, 10)[2] == -504 * 33
    assert (eisenstein(4, 10) ** 3 - eisenstein(6, 10) ** 2)[0] == 0


def test_delta_small_coefficients():
    d = delta(10)
    assert d.coeffs[1:4] == (1, -24, 252)
    assert d[6] == d[2] * d[3]
    assert d[4] == d[2] ** 2 - 2 ** 11


def test_delta_two_constructions_agree():
    assert delta(300).coeffs == delta_product(300).coeffs


def test_dimensions():
    assert dim_cusp(12) == 1 and dim_cusp(26) == 1 and dim_cusp(24) == 2
    assert dim_cusp(14) == 0 and dim_cusp(38) == 2 and dim_cusp(120) == 10
    assert len(victor_miller_basis(36, 20)) == dim_cusp(36)


def test_delta_eigenvalue():
    f = form(12)
    assert f.lam[2] == pytest.approx(-24 * 2 ** -5.5, rel=1e-14)
    assert f.lam[2] == pytest.approx(-0.530330, abs=1e-6)
    assert f.provenance == "exact-integer"


def test_integer_coefficients_are_tau():
    assert integer_coefficients(12, 50) == list(delta(50).coeffs)


def test_deligne_bound_weight_38():
    primes = [p for p in range(2, 98) if all(p % q for q in range(2, p))]
    for f in hecke_basis(38, 120):
        assert all(abs(f.lam[p]) <= 2 for p in primes)


@pytest.mark.parametrize("k", [12, 24, 36, 40])
def test_hecke_relations(k):
    for f in hecke_basis(k, 2600, with_weights=False):
        lam = f.lam
        for m in range(1, 51):
            for n in range(m, 51):
                g = math.gcd(m, n)
                rhs = sum(lam[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
                assert abs(lam[m] * lam[n] - rhs) < 1e-9


def test_t2_t3_commute():
    for k in (24, 36, 48):
        A = np.array(hecke_matrix(k, 2, 40), dtype=object)
        B = np.array(hecke_matrix(k, 3, 40), dtype=object)
        assert (A.dot(B) == B.dot(A)).all()


def test_forms_sorted_and_real():
    fs = hecke_basis(48, 100, with_weights=False)
    l2 = [f.lam[2] for f in fs]
    assert l2 == sorted(l2)
    assert all(np.isrealobj(f.lam) and f.lam[1] == pytest.approx(1.0, abs=1e-12) for f in fs)


@pytest.mark.parametrize("k,eps", [(12, 1), (18, -1), (22, -1), (24, 1)])
def test_root_number(k, eps):
    assert form(k).epsilon == eps


def test_omega_delta():
    w = form(12).omega
    # the O(2^-k) term of the weight sum is not small at k = 12
    assert w == pytest.approx(2.8402, abs=1e-4)
    assert abs(w - 1) > 1e-2


def test_omega_sum_weight_40():
    assert abs(sum(f.omega for f in hecke_basis(40, 200)) - 1) < 1e-9


@pytest.mark.parametrize("k", [12, 16, 24, 30, 38])
def test_omega_positive(k):
    for f in hecke_basis(k, 200):
        assert f.omega > 0 and f.sym2_at_1 > 0


def test_omega_two_pairs():
    from superpositivity.eigenforms import harmonic_weights
    f = hecke_basis(12, 60, with_weights=False)
    w11 = harmonic_weights(f, [(1, 1)])[0]
    w22 = harmonic_weights(f, [(2, 2)])[0]
    assert abs(w11 - w22) < 1e-9


def test_harmonic_family():
    fam = HarmonicFamily.build(20, parity=2, N=100)
    assert {f.weight for f in fam.forms} == {22, 26, 30, 34, 38}
    assert all(f.epsilon == -1 for f in fam.forms)
    with pytest.raises(ValueError):
        HarmonicFamily.build(20, parity=2, weights=[24])


def test_weight_range():
    with pytest.raises(ValueError):
        hecke_basis(132, 100)
    with pytest.raises(ValueError):
        hecke_basis(13, 100)


def test_csv_round_trip_bit_exact():
    forms = hecke_basis(24, 120)
    text = to_csv(forms, 100)
    assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
    back = from_csv(text)
    for f in forms:
        lam, om = back[(f.weight, f.index)]
        assert np.array_equal(np.asarray(lam), f.lam[1:101])
        assert om == f.omega


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 60), st.integers(1, 60))
def test_delta_multiplicative(m, n):
    t = delta(3601)
    if math.gcd(m, n) == 1:
        assert t[m * n] == t[m] * t[n]
