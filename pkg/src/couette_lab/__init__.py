"""Numerical laboratory for linear and nonlinear stability of planar Couette flow
between clamped walls: Orr-Sommerfeld resolvents, Airy-function homogeneous
solutions, space-time energy estimates and a desk-scale nonlinear solver."""

__version__ = "0.1.0"
