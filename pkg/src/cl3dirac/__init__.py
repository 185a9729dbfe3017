"""Cl(3) space algebra and a nonlinear Dirac equation with hydrodynamic diagnostics."""

__version__ = "0.1.0"
