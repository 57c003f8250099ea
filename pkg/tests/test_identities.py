import numpy as np
import pytest

from superpositivity.identities import (bessel_average_check, bessel_average_slope,
                                        dirichlet_identity_check, petersson_check,
                                        voronoi_bump, voronoi_check)
from superpositivity.numerics import SmoothBump


def test_petersson_examples():
    assert petersson_check(12, 1, 1).residual < 1e-10
    assert petersson_check(16, 2, 3).residual < 1e-9
    assert petersson_check(24, 2, 2).residual < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("k", [12, 16, 18, 20, 22, 24, 26])
def test_petersson_grid(k):
    worst = max(petersson_check(k, m, n).residual for m in range(1, 11) for n in range(m, 11))
    assert worst < 1e-8


def test_petersson_weights_exclude_checked_pair():
    r = petersson_check(24, 2, 2)
    assert (2, 2) not in r.weight_pairs


def test_bessel_average_k50():
    r = bessel_average_check(50, 75)
    assert r.error < 1e-3


def test_bessel_average_scaled_bounded():
    s = [bessel_average_check(K, 1.5 * K).scaled_error for K in (25, 50, 100)]
    assert max(s) < 10 * min(s) + 1.0


def test_bessel_average_outside_support():
    r = bessel_average_check(80, 10)
    assert abs(r.lhs) < 1e-2


def test_bessel_average_slope():
    assert abs(bessel_average_slope() + 2) <= 0.3


def test_voronoi_unit_modulus():
    assert voronoi_check(0.3, 1, 1).residual < 1e-8


def test_voronoi_twisted():
    assert voronoi_check(0.3, 2, 5, voronoi_bump(5, 20)).residual < 1e-7


def test_voronoi_conjugation():
    a = voronoi_check(0.4, 1, 3)
    b = voronoi_check(-0.4, 1, 3)
    assert abs(a.residual - b.residual) < 1e-10
    assert a.lhs == pytest.approx(b.lhs, abs=1e-12)


def test_voronoi_small_t_continuity():
    a = voronoi_check(0.05, 1, 2).lhs
    b = voronoi_check(0.1, 1, 2).lhs
    assert abs(a - b) < 0.05 * abs(a)


def test_voronoi_validation():
    with pytest.raises(ValueError):
        voronoi_check(0.3, 2, 4)
    with pytest.raises(ValueError):
        voronoi_check(0.01, 1, 3)
    with pytest.raises(ValueError):
        voronoi_check(0.3, 1, 3, SmoothBump(30, 50))


@pytest.mark.parametrize("ell,s", [(12, 1.1), (1, 0.9), (6, 1.0 + 0.5j)])
def test_dirichlet_ramanujan(ell, s):
    r = dirichlet_identity_check(ell, s)
    assert r.residual <= r.tail_bound


def test_dirichlet_phi():
    r = dirichlet_identity_check(None, 1.2 + 0.5j)
    assert r.residual <= r.tail_bound


def test_dirichlet_ell_one_closed_form():
    assert dirichlet_identity_check(1, 1.3).closed_form == pytest.approx(1.0)


def test_dirichlet_validation():
    with pytest.raises(ValueError):
        dirichlet_identity_check(1, 0.6)
