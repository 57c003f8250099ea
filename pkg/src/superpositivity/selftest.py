"""Fast invariant and identity checks run by ``superpositivity selftest``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certify import SelbergBox, polynomial_from_zeros, selberg_identity_check
from .constants import ScriptV, lemma_vl_scan, wedge_grid
from .eigenforms import hecke_basis
from .identities import bessel_average_check, dirichlet_identity_check, petersson_check
from .lfunction import CompletedLFunction, l_squared_afe, l_squared_direct
from .numerics import rectangle, winding_number
from .specialfn import eta, mellin_h


@dataclass
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.threshold)


def hecke_relations(weights=(12, 16, 18, 20, 22, 24, 26), N: int = 200) -> float:
    """max |lambda(m) lambda(n) - sum_{d | (m,n)} lambda(mn/d^2)| over m, n <= 14."""
    worst = 0.0
    for k in weights:
        for f in hecke_basis(k, N, with_weights=False):
            lam = f.lam
            for m in range(1, 15):
                for n in range(1, 15):
                    g = math.gcd(m, n)
                    rhs = sum(lam[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
                    worst = max(worst, abs(lam[m] * lam[n] - rhs))
    return worst


def functional_equation(weights=(12, 18, 24)) -> float:
    """Relative gap of Lambda(s) - eps Lambda(1 - s), with the two sides
    evaluated using different splittings of the Mellin integral."""
    rng = np.random.default_rng(7)
    s = rng.uniform(-0.5, 1.5, 5) + 1j * rng.uniform(-8, 8, 5)
    worst = 0.0
    for k in weights:
        f = hecke_basis(k, 400, with_weights=False)[0]
        a = CompletedLFunction(f, split=1.0)
        b = CompletedLFunction(f, split=1.3)
        for z in s:
            lhs = a.Lambda(z)
            rhs = f.epsilon * b.Lambda(1 - z)
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return worst


def winding_integrality() -> float:
    """Distance of computed windings from the planted zero counts."""
    worst = 0.0
    cases = [((0.8, 0.8, 1.2), 3), ((0.8, 0.8, 1.7), 2), ((1.0 + 0.2j, 1.0 - 0.2j), 2), ((2.0,), 0)]
    for zeros, expected in cases:
        r = winding_number(polynomial_from_zeros(zeros), rectangle(0.5, 1.5, -0.5, 0.5))
        worst = max(worst, abs(r.winding - expected), r.margin)
    return worst


def eta_multiplicativity() -> float:
    worst = 0.0
    for nu in (0.3j, 0.25, -0.1 + 0.7j):
        for m, n in ((3, 4), (5, 9), (7, 8), (11, 12), (9, 25)):
            worst = max(worst, abs(eta(nu, m * n) - eta(nu, m) * eta(nu, n)) / abs(eta(nu, m * n)))
    return worst


def mellin_oddness() -> float:
    s = np.array([0.3 + 1j, 2.0 - 3j, 1.5 + 10j, 0.7])
    return float(np.max(np.abs(np.asarray(mellin_h(s)) + np.asarray(mellin_h(-s)))))


def selberg_random(n: int = 20, seed: int = 3) -> float:
    rng = np.random.default_rng(seed)
    box = SelbergBox(0.55, 2.0, 0.4)
    worst = 0.0
    for _ in range(n):
        zeros = list(rng.uniform(0.3, 1.9, 3) + 1j * rng.uniform(-0.9, 0.9, 3))
        worst = max(worst, selberg_identity_check(polynomial_from_zeros(zeros), zeros, box))
    return worst


def afe_consistency() -> float:
    worst = 0.0
    for k, d, t in ((12, 0.0, 0.0), (16, 0.05, 1.0), (24, -0.1, 2.5)):
        f = hecke_basis(k, 1200, with_weights=False)[0]
        a = l_squared_afe(f, d, t)
        b = l_squared_direct(CompletedLFunction(f), d, t)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    return worst


def v_symmetry() -> float:
    sv = ScriptV()
    rng = np.random.default_rng(11)
    u = rng.uniform(-4, 40, 40)
    v = rng.uniform(0.01, 60, 40)
    return float(np.max(np.abs(sv.minus_one(u, v) - sv.minus_one(u, -v)) / np.abs(sv(u, v))))


def run_checks(quick: bool = False) -> list[Check]:
    checks = [
        Check("hecke_relations", hecke_relations(), 1e-10),
        Check("functional_equation", functional_equation(), 1e-10),
        Check("winding_integrality", winding_integrality(), 0.25),
        Check("eta_multiplicativity", eta_multiplicativity(), 1e-12),
        Check("mellin_h_oddness", mellin_oddness(), 1e-12),
        Check("selberg_identity", selberg_random(), 1e-8),
        Check("petersson_12_1_1", petersson_check(12, 1, 1).residual, 1e-8),
        Check("petersson_24_2_3", petersson_check(24, 2, 3).residual, 1e-8),
        Check("dirichlet_ell_6", (lambda r: r.residual - r.tail_bound)(dirichlet_identity_check(6, 1.0)), 0.0),
        Check("dirichlet_phi", (lambda r: r.residual - r.tail_bound)(dirichlet_identity_check(None, 1.0)), 0.0),
        Check("bessel_average_scaled", bessel_average_check(50, 75).scaled_error, 10.0),
        Check("afe_vs_direct", afe_consistency(), 1e-6),
        Check("v_even_in_v", v_symmetry(), 1e-10),
        Check("lemma_wedge", -lemma_vl_scan(grid=wedge_grid(10 if quick else 40)).worst_slack, 0.0),
    ]
    return checks
