"""Certify the triangle next to the central point for the one-dimensional
weights 12..26 and print the central derivative signs.

    python3 demos/certify_small_weights.py
"""

import numpy as np

from superpositivity import CompletedLFunction, certify_triangle, hecke_basis, superpositivity_report


def main():
    for k in (12, 16, 18, 20, 22, 26):
        L = CompletedLFunction(hecke_basis(k, 400)[0])
        cert = certify_triangle(L)
        rep = superpositivity_report(L, max_order=8)
        d = np.array(rep["derivatives"])
        signs = "".join("+" if v > 1e-12 else ("0" if abs(v) <= 1e-12 else "-") for v in d)
        print(f"k={k:2d} eps={L.epsilon:+d} order={cert.central_order} {cert.verdict:<13} "
              f"derivatives {signs}  Lambda(1/2)={d[0]:.3e}")


if __name__ == "__main__":
    main()
