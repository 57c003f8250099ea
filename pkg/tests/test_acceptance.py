"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -s`` (the lines are also
repeated in the terminal summary).
"""

import math
import time

import numpy as np
import pytest

from superpositivity.certify import (SelbergBox, certify_triangle, polynomial_from_zeros,
                                     selberg_identity_check, superpositivity_report)
from superpositivity.constants import lemma_vl_scan, tail_and_total, wedge_grid
from superpositivity.eigenforms import hecke_basis
from superpositivity.identities import (bessel_average_check, bessel_average_slope,
                                        dirichlet_identity_check, petersson_check, voronoi_bump,
                                        voronoi_check)
from superpositivity.lfunction import CompletedLFunction, l_squared_afe, l_squared_direct
from superpositivity.selftest import run_checks

from .conftest import moment_ratio

RESULTS: dict[tuple, tuple[bool, str]] = {}

PINS = {"n0": 0.361310325, "n1": 0.194405329, "n2": 0.038902133, "n3": 0.009882437,
        "sum_4_13": 0.004388858, "tail": 0.012113991, "total": 0.621003073}
BOUNDS = {"n0": 0.3613, "n1": 0.19441, "n2": 0.03891, "n3": 0.00989,
          "sum_4_13": 0.00439, "tail": 0.01212, "total": 0.63}


def report(number: int, title: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  [{number}] {title}: {detail}"
    RESULTS[(number, title)] = (ok, line)
    print(line)
    assert ok, line


def test_1_constants():
    t0 = time.perf_counter()
    r = tail_and_total(tol=1e-10)
    secs = time.perf_counter() - t0
    got = {"n0": r.n0, "n1": r.nj[1], "n2": r.nj[2], "n3": r.nj[3],
           "sum_4_13": r.sum_4_13, "tail": r.tail, "total": r.total}
    bad = [k for k in BOUNDS if not got[k] <= BOUNDS[k]]
    unpinned = [k for k in PINS if abs(got[k] - PINS[k]) >= 1e-6]
    ok = not bad and not unpinned and r.proportion >= 0.27 and secs < 300
    detail = (", ".join(f"{k}={got[k]:.10g}" for k in got) + f", proportion={r.proportion:.6f}"
              + f", {secs:.1f}s")
    if bad:
        detail += "; above bound: " + ", ".join(f"{k} ({got[k]:.10g} > {BOUNDS[k]})" for k in bad)
    if unpinned:
        detail += "; moved from pin: " + ", ".join(unpinned)
    report(1, "zero-density constants", ok, detail)


def test_2_lemma_wedge():
    t0 = time.perf_counter()
    scan = lemma_vl_scan(grid=wedge_grid(40))
    secs = time.perf_counter() - t0
    ok = scan.worst_slack > 0 and secs < 60
    report(2, "wedge scan 40x40", ok,
           f"worst relative slack {scan.worst_slack:.5f} at {scan.worst_point}, {secs:.1f}s")


@pytest.mark.parametrize("k", [12, 16, 20, 18, 22, 26])
def test_3_certification(k):
    t0 = time.perf_counter()
    f = hecke_basis(k, 400)[0]
    L = CompletedLFunction(f)
    cert = certify_triangle(L)
    rep = superpositivity_report(L, 12)
    secs = time.perf_counter() - t0
    d = np.array(rep["derivatives"])
    forced = d[1::2] if f.epsilon == 1 else d[0::2]
    vanish = float(np.max(np.abs(forced)))
    ok = (cert.verdict == "certified" and rep["clause1"] and rep["clause2"] and rep["clause3"]
          and vanish <= 1e-12 and secs < 120)
    report(3, f"certify weight {k}", ok,
           f"{cert.verdict}, order {cert.central_order}, clauses "
           f"{int(rep['clause1'])}{int(rep['clause2'])}{int(rep['clause3'])}, "
           f"forced zeros <= {vanish:.1e}, {secs:.1f}s")


def test_4_identities():
    pet = max(petersson_check(k, m, n).residual
              for k in (12, 16, 18, 20, 22, 24, 26) for m in range(1, 11) for n in range(m, 11))
    rng = np.random.default_rng(2024)
    box = SelbergBox(0.55, 2.0, 0.4)
    sel = 0.0
    for _ in range(20):
        zeros = list(rng.uniform(0.3, 1.9, 3) + 1j * rng.uniform(-0.9, 0.9, 3))
        sel = max(sel, selberg_identity_check(polynomial_from_zeros(zeros), zeros, box))
    vor_cfg = [(0.3, 1, 1, None), (0.3, 2, 5, (5, 20)), (0.5, 1, 3, None),
               (1.0, 3, 7, (2, 30)), (-0.7, 5, 12, (10, 35))]
    vor = max(voronoi_check(t, a, c, voronoi_bump(*g) if g else None).residual
              for t, a, c, g in vor_cfg)
    slope = bessel_average_slope()
    scaled = [bessel_average_check(K, 1.5 * K).scaled_error for K in (25, 50, 100)]
    dirs = [dirichlet_identity_check(ell, s) for ell, s in
            ((1, 0.9), (6, 1.0), (12, 1.1), (None, 1.2 + 0.5j), (None, 0.8))]
    dir_ok = all(r.residual <= r.tail_bound for r in dirs)
    ok = (pet < 1e-8 and sel < 1e-8 and vor < 1e-7 and abs(slope + 2) <= 0.3
          and max(scaled) < 10 * min(scaled) + 1 and dir_ok)
    report(4, "identity suite", ok,
           f"Petersson {pet:.1e}, Selberg {sel:.1e}, Voronoi {vor:.1e}, Bessel slope {slope:.3f} "
           f"(scaled {min(scaled):.2f}..{max(scaled):.2f}), Dirichlet within tails {dir_ok}")


AFE_POINTS = [(12, 0, 0.0, 0.0), (12, 0, 0.02, 0.0), (16, 0, 0.0, 0.3), (18, 0, 0.01, 1.0),
              (20, 0, -0.1, 2.0), (22, 0, 0.005, 0.5), (24, 1, -0.05, 1.5), (26, 0, 0.01, 3.0),
              (30, 0, -0.2, 0.7), (38, 1, 0.0, 4.0)]


def test_5_afe_consistency():
    gaps = []
    for k, i, d, t in AFE_POINTS:
        f = hecke_basis(k, 2000, with_weights=False)[i]
        a = l_squared_afe(f, d, t)
        b = l_squared_direct(CompletedLFunction(f), d, t)
        gaps.append(abs(a - b) / b)
    ok = max(gaps) < 1e-6
    report(5, "AFE vs direct |L|^2", ok, f"max relative gap {max(gaps):.1e} over {len(gaps)} points")


def test_6_twisted_moment_trend():
    t0 = time.perf_counter()
    lhs30, main30 = moment_ratio(30.0, 1, 0.02)
    lhs20, main20 = moment_ratio(20.0, 1, 0.01)
    lhs40, main40 = moment_ratio(40.0, 1, 0.01)
    secs = time.perf_counter() - t0
    r30 = lhs30 / main30
    g20, g40 = abs(lhs20 / main20 - 1), abs(lhs40 / main40 - 1)
    ok = 0.7 <= r30 <= 1.3 and g40 < g20 and secs < 1200
    report(6, "twisted moment trend", ok,
           f"ratio K=30 {r30:.6f}; |ratio-1| K=20 {g20:.2e} > K=40 {g40:.2e}; {secs:.0f}s")


def test_7_selftest():
    t0 = time.perf_counter()
    checks = run_checks()
    secs = time.perf_counter() - t0
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and secs < 900
    report(7, "selftest invariants", ok,
           f"{len(checks) - len(failed)}/{len(checks)} checks pass, {secs:.1f}s"
           + (f"; failed: {', '.join(failed)}" if failed else ""))
