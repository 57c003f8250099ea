"""Super-positivity certificates, identity checks and zero-density constants
for L-functions of level-one Hecke eigenforms."""

from .certify import certify_triangle, hadamard_cross_check, superpositivity_report
from .constants import ScriptV, n0_bound, nj_bound, script_v, tail_and_total
from .eigenforms import HeckeEigenform, hecke_basis
from .lfunction import CompletedLFunction, lambda_derivatives, l_squared_afe
from .mollifier import MollifierParams, mollifier_value, twisted_moment_lhs, twisted_moment_main

__version__ = "0.1.0"
