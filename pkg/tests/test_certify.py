import math

import numpy as np
import pytest

from superpositivity.certify import (FunctionTarget, SelbergBox, TriangleRegion, certify_triangle,
                                     hadamard_cross_check, planted, polynomial_from_zeros,
                                     selberg_identity_check, selberg_lhs, superpositivity_report)

from .conftest import completed

BOX = SelbergBox(0.5, 1.5, 0.5)


def test_selberg_single_zero():
    assert selberg_lhs([0.8], BOX) == pytest.approx(2 * math.sinh(0.3 * math.pi), rel=1e-14)
    assert selberg_identity_check(lambda s: s - 0.8, [0.8], BOX) < 1e-8


def test_selberg_pair():
    zeros = [0.7 + 0.1j, 0.7 - 0.1j]
    assert selberg_identity_check(polynomial_from_zeros(zeros), zeros, BOX) < 1e-8


def test_selberg_zero_free():
    assert selberg_lhs([], BOX) == 0.0
    assert selberg_identity_check(lambda s: np.exp(3 * s), [], BOX) < 1e-8


def test_selberg_randomized():
    rng = np.random.default_rng(20)
    box = SelbergBox(0.55, 2.0, 0.4)
    for _ in range(20):
        zeros = list(rng.uniform(0.3, 1.9, 3) + 1j * rng.uniform(-0.9, 0.9, 3))
        assert selberg_identity_check(polynomial_from_zeros(zeros), zeros, box) < 1e-8


def test_box_validation():
    with pytest.raises(ValueError):
        SelbergBox(1.0, 0.5, 0.1)
    with pytest.raises(ValueError):
        SelbergBox(0.5, 1.0, 0.0)


def test_triangle_covered_by_disk_and_rect():
    reg = TriangleRegion(0.02)
    rng = np.random.default_rng(0)
    s = 0.5 + rng.uniform(0, 0.5, 5000) + 1j * rng.uniform(-0.5, 0.5, 5000)
    inside = TriangleRegion.contains(s)
    assert np.all(reg.covered(s[inside]))
    with pytest.raises(ValueError):
        TriangleRegion(0.2)


def test_certify_delta(delta_L):
    c = certify_triangle(delta_L)
    assert (c.central_order, c.disk_winding, c.rect_winding, c.verdict) == (0, 0, 0, "certified")
    assert delta_L.Lambda(0.5).real > 0


def test_certify_weight_18():
    c = certify_triangle(completed(18))
    assert (c.central_order, c.disk_winding, c.rect_winding, c.verdict) == (1, 1, 0, "certified")


@pytest.mark.slow
@pytest.mark.parametrize("rho", [0.01, 0.05])
def test_certify_rho_invariance(delta_L, rho):
    assert certify_triangle(delta_L, rho).verdict == "certified"


def test_planted_zero_detected(delta_L):
    target = planted(delta_L, (0.8,))
    c = certify_triangle(target)
    assert c.rect_winding == 1 and c.verdict == "not-certified"


def test_certificate_dict(delta_L):
    d = certify_triangle(delta_L).to_dict()
    assert {"form", "central_order", "disk_winding", "rect_winding", "margins", "verdict"} <= set(d)
    assert min(d["margins"]["disk_modulus"], d["margins"]["rect_modulus"]) > 0.05


def test_ambiguous_order_fails():
    # central value 1e-10: neither zero nor clearly nonzero
    target = FunctionTarget(lambda s: 1e-10 + 0 * s, 1, "tiny")
    assert certify_triangle(target).verdict == "failed"


def test_report_delta(delta_L):
    r = superpositivity_report(delta_L, 12)
    d = np.array(r["derivatives"])
    assert np.all(d[0::2] > 0) and np.max(np.abs(d[1::2])) < 1e-12
    assert r["clause1"] and r["clause2"] and r["clause3"]
    assert all(v > 0 for v in r["clause2_by_sigma"][0.75]["values"][:11])
    assert r["euler_1p1"] < 1


def test_report_weight_26():
    r = superpositivity_report(completed(26), 12)
    d = np.array(r["derivatives"])
    assert r["central_order"] == 1
    assert np.all(d[1::2] > 0) and np.max(np.abs(d[0::2])) < 1e-12


@pytest.mark.slow
def test_hadamard_delta(delta_L):
    a = hadamard_cross_check(delta_L, 15.0)
    b = hadamard_cross_check(delta_L, 30.0)
    assert b.gap < a.gap
    assert b.sign_count == b.winding_count
    assert np.all(b.product >= b.sigmas ** b.m * math.exp(b.A))
