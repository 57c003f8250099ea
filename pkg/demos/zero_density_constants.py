"""Reproduce the zero-density constants and the proportion they leave.

    python3 demos/zero_density_constants.py
"""

from superpositivity.constants import ScriptV, lemma_vl_scan, tail_and_total, wedge_grid

rep = tail_and_total()
print(f"N0        {rep.n0:.10f}")
for j in range(1, 4):
    print(f"N{j}        {rep.nj[j]:.10f}")
print(f"N4..N13   {rep.sum_4_13:.10f}")
print(f"tail      {rep.tail:.10f}")
print(f"total     {rep.total:.10f}")
print(f"1 - total {rep.proportion:.10f}")

# the large-u bound behind the tail
scan = lemma_vl_scan(grid=wedge_grid(20))
print(f"wedge scan: worst relative slack {scan.worst_slack:.4f} at {scan.worst_point}")

sv = ScriptV()
for u, v in ((-4.0, 0.0), (0.0, 1.0), (2.0, 2.18), (10.0, 30.0)):
    print(f"V({u:5.1f}, {v:5.2f}) = {sv(u, v):.12g}")
