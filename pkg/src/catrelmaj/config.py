"""Numeric tolerances shared by every module.

Exact-rational code paths never consult these; they only govern float64
comparisons.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    equality: float = 1e-12
    inequality_slack: float = 1e-9
    support: float = 1e-12
    alpha_snap: float = 1e-9
    rationalize_max_denominator: int = 10**9


TOL = Tolerances()
