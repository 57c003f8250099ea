import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superpositivity.constants import (CountingRegions, ScriptV, SingularPoint, closed_tail,
                                       lemma_vl_scan, n0_bound, nj_bound, script_v, wedge_grid)
from superpositivity.mollifier import DEFAULT, MollifierParams

from .conftest import constants_report

# mpmath (30 digits) evaluation of the displayed V - 1, frozen
MP_ORACLE = {
    (3.0, 2.0): 0.0067586987831299243824,
    (-4.0, 1.3): 1448325384551.1197384,
    (0.7, 0.01): -0.054224119212628640572,
    (12.0, 40.0): 1.5106483602294938854e-7,
    (-4.0, 0.2): 1575776834427.297978,
}
MP_NEAR_U0 = {1e-3: 2.78057497023854, 1e-4: 2.78899387559238, 1e-5: 2.78983839475831,
              -1e-3: 2.79934869580675}

# computed values, frozen (reproducibility to 1e-6)
PINS = {"n0": 0.361310325, "n1": 0.194405329, "n2": 0.038902133, "n3": 0.009882437,
        "sum_4_13": 0.004388858, "tail": 0.012113991, "total": 0.621003073}


@pytest.fixture(scope="module")
def sv():
    return ScriptV()


@pytest.mark.parametrize("uv", sorted(MP_ORACLE))
def test_v_against_mp_oracle(sv, uv):
    assert sv.minus_one(*uv) == pytest.approx(MP_ORACLE[uv], rel=1e-12)


@pytest.mark.parametrize("u", sorted(MP_NEAR_U0))
def test_v_near_u_zero_against_oracle(sv, u):
    # below |u| = 1e-4 the merged pair is a quadratic through its u = 0 limit
    rel = 1e-9 if abs(u) < 1e-4 else 1e-12
    assert sv(u, 0.5) == pytest.approx(MP_NEAR_U0[u], rel=rel)


def test_v1_riemann_oracle(sv):
    p = DEFAULT
    n = 100000
    x = (np.arange(n) + 0.5) * p.upsilon / n
    a = p.M_exponent
    riemann = np.sum(np.exp(-2 * (1 - x) * a) * p.dP(x) ** 2) * p.upsilon / n / (2 * a)
    for v in (0.0, 3.0, -11.0):
        v1, _, _ = sv.components(1.0, v)
        assert v1 - 1 == pytest.approx(riemann, abs=1e-8)


def test_v_bound_at_20_1(sv):
    assert sv(20.0, 1.0) <= 1 + math.exp(-10)


def test_v_even_in_v(sv):
    rng = np.random.default_rng(3)
    u = rng.uniform(-4, 40, 50)
    v = rng.uniform(0.01, 60, 50)
    assert np.max(np.abs(sv.minus_one(u, v) - sv.minus_one(u, -v)) / np.abs(sv(u, v))) < 1e-10


def test_v_positive_on_paths(sv):
    S, R, d = DEFAULT.S, DEFAULT.R, DEFAULT.d
    assert np.all(sv(-R, np.linspace(0, S, 50)) > 0)
    assert np.all(sv(np.linspace(0, 396, 200) - R, S) > 0)
    for j in (1, 5, 13):
        assert np.all(sv(j * d / 2, np.linspace(0, 1.5 * (j + 1) * d, 30)) > 0)


def test_v_small_v_branch_continuous(sv):
    a = sv(2.0, 0.99e-4)
    b = sv(2.0, 1.01e-4)
    assert abs(a - b) < 1e-8


def test_v_small_u_branch_continuous(sv):
    a = sv(0.99e-4, 0.5)
    b = sv(1.01e-4, 0.5)
    # slope in u is about -9.4, so the step of 2e-6 moves V by ~2e-5
    assert abs(a - b) < 5e-5


def test_v_slope_at_u_zero(sv):
    # dV/du at (0, 0.5) from the oracle values; explains the two checks below
    slope = (MP_NEAR_U0[1e-3] - MP_NEAR_U0[-1e-3]) / 2e-3
    assert slope == pytest.approx(-9.4, abs=0.1)
    assert (sv(1e-3, 0.5) - sv(-1e-3, 0.5)) / 2e-3 == pytest.approx(slope, rel=1e-9)


def test_v_continuity_across_u_zero(sv):
    assert abs(sv(1e-3, 0.5) - sv(-1e-3, 0.5)) < 1e-2


def test_v_continuity_small_steps(sv):
    assert abs(sv(1e-4, 0.5) - sv(1e-5, 0.5)) < 1e-4


def test_v_singular_point(sv):
    with pytest.raises(SingularPoint):
        sv(0.0, 0.0)


def test_v_scalar_and_array(sv):
    assert isinstance(sv.minus_one(3.0, 2.0), float)
    out = sv.minus_one(np.array([3.0, 12.0]), np.array([2.0, 40.0]))
    assert out.shape == (2,)
    assert script_v(3.0, 2.0) == pytest.approx(1 + MP_ORACLE[(3.0, 2.0)], rel=1e-14)


@pytest.mark.parametrize("uv", [(10.0, 0.0), (10.0, 50.0), (10.0, -50.0), (35.0, 100.0)])
def test_lemma_points(uv):
    r = lemma_vl_scan(grid=[uv])
    assert r.worst_slack > 0


def test_lemma_far_point(sv):
    assert sv.minus_one(60.0, 10.0) < math.exp(-30)


def test_lemma_wedge_40():
    r = lemma_vl_scan(grid=wedge_grid(40))
    assert r.worst_slack > 0
    assert set(r.slacks) == {"V", "V1", "V2", "V3", "V31", "V32"}
    assert all(s > 0 for s in r.slacks.values())


def test_lemma_grid_validation():
    with pytest.raises(ValueError):
        lemma_vl_scan(grid=[(10.0, 60.0)])
    with pytest.raises(ValueError):
        lemma_vl_scan(grid=[(5.0, 0.0)])


def test_closed_tail_against_direct_sum():
    d = DEFAULT.d
    direct = 0.6 * math.fsum(math.exp(-d * j / 4) for j in range(14, 2000))
    assert closed_tail() == pytest.approx(direct, rel=1e-14)
    assert closed_tail() <= 0.01212


def test_report_pins():
    r = constants_report()
    got = {"n0": r.n0, "n1": r.nj[1], "n2": r.nj[2], "n3": r.nj[3],
           "sum_4_13": r.sum_4_13, "tail": r.tail, "total": r.total}
    for key, pin in PINS.items():
        assert abs(got[key] - pin) < 1e-6, key
    assert r.proportion == pytest.approx(1 - r.total)
    assert r.hough_term == 0 and r.hough_asymptotic
    assert r.error_budget < 1e-7


def test_report_paper_bounds_except_n0():
    r = constants_report()
    assert r.nj[1] <= 0.19441 and r.nj[2] <= 0.03891 and r.nj[3] <= 0.00989
    assert r.sum_4_13 <= 0.00439 and r.tail <= 0.01212
    assert r.total <= 0.63 and r.proportion >= 0.27
    assert r.n0 > 0


def test_n0_published_bound():
    # computed 0.3613103251: above the stated bound by 3.3e-7
    assert constants_report().n0 <= 0.3613


def test_nj_decreasing():
    r = constants_report()
    vals = [r.nj[j] for j in range(1, 14)] + [nj_bound(14).value]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_tolerance_independence():
    assert abs(n0_bound(tol=1e-8).value - constants_report().n0) < 1e-7
    assert abs(nj_bound(2, tol=1e-8).value - constants_report().nj[2]) < 1e-7


def test_nj_validation():
    with pytest.raises(ValueError):
        nj_bound(0)
    with pytest.raises(ValueError):
        nj_bound(41)


def test_report_dict():
    d = constants_report().to_dict()
    assert set(d["nj"]) == {str(j) for j in range(1, 14)}
    assert d["params"]["upsilon"] == 0.64


def test_counting_regions_nested():
    cr = CountingRegions(1e8)
    assert cr.nested(300)
    b = cr.box(3)
    lk = math.log(1e8)
    assert b.W0 == pytest.approx(0.5 + 1.5 * DEFAULT.d / lk)
    assert b.H == pytest.approx(6 * DEFAULT.d / lk)


@settings(max_examples=30, deadline=None)
@given(st.floats(10, 60), st.floats(-1, 1))
def test_lemma_bound_random(u, frac):
    assert script_v(u, 5 * u * frac) <= 1 + math.exp(-u / 2)


def test_other_params_change_constants():
    p = MollifierParams(upsilon=0.6)
    assert p.S != DEFAULT.S
    assert ScriptV(p)(3.0, 2.0) != ScriptV()(3.0, 2.0)
