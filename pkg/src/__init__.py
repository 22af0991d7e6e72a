"""
Axisymmetric Hall-MHD Lab.

Shared logging and error handling infrastructure for the solver, diagnostics,
lemma bench and experiment harness.
"""

__version__ = "2026.10.0"
__author__ = "Axisym Hall Lab"
__description__ = "Desk-scale laboratory for axisymmetric resistive Hall-MHD with swirl"
