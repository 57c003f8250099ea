"""Harmonic average of lambda_f(l)|L(1/2+delta, f)|^2 over k = 2 mod 4,
against the three main terms, for growing K.

Takes about two minutes (K = 40 dominates).

    python3 demos/twisted_moment.py
"""

import time

from superpositivity.mollifier import twisted_moment_lhs, twisted_moment_main

delta, t = 0.01, 0.0
for K in (20.0, 30.0, 40.0):
    for ell in (1, 2):
        t0 = time.perf_counter()
        lhs = twisted_moment_lhs(ell, delta, t, K)
        main = twisted_moment_main(ell, delta, t, K)
        print(f"K={K:4.0f} l={ell}  forms={lhs.forms:3d}  lhs={lhs.value:.6e}  main={main.total:.6e}  "
              f"ratio={lhs.value / main.total:.6f}  ({time.perf_counter() - t0:.0f}s)")
