"""Exact symbolic checks for poly-symplectic and poly-Poisson geometry with polynomial data."""

from .exactalg import SamplePlan, poly_ring
from .report import ERROR, FAIL, PASS, WARN, Check, Report

__version__ = "0.1.0"

__all__ = ["SamplePlan", "poly_ring", "Report", "Check", "PASS", "FAIL", "WARN", "ERROR", "__version__"]
