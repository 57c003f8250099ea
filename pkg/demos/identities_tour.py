"""One instance of each numerical identity, with its residual.

    python3 demos/identities_tour.py
"""


from superpositivity.certify import SelbergBox, polynomial_from_zeros, selberg_identity_check
from superpositivity.identities import (bessel_average_check, dirichlet_identity_check,
                                        petersson_check, voronoi_check)

r = petersson_check(24, 2, 3)
print(f"Petersson k=24 (2,3): lhs={r.lhs:.15f} rhs={r.rhs:.15f} residual={r.residual:.1e}")

for K in (25, 50, 100):
    b = bessel_average_check(K, 1.5 * K)
    print(f"J-Bessel average K={K}: error={b.error:.2e} scaled={b.scaled_error:.3f}")

v = voronoi_check(0.3, 2, 5)
print(f"Voronoi t=0.3 a/c=2/5: residual={v.residual:.1e} after {v.dual_terms} dual terms")

for ell, s in ((12, 1.1), (None, 1.2 + 0.5j)):
    d = dirichlet_identity_check(ell, s)
    print(f"Dirichlet ell={ell} s={s}: residual={d.residual:.1e} tail bound={d.tail_bound:.1e}")

zeros = [0.7 + 0.1j, 0.7 - 0.1j, 1.3]
res = selberg_identity_check(polynomial_from_zeros(zeros), zeros, SelbergBox(0.5, 1.5, 0.5))
print(f"box identity, three zeros: residual={res:.1e}")
