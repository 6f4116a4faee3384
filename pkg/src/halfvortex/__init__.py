"""Viscous point vortex above a no-slip wall: kernels, operators and solvers."""

__version__ = "0.1.0"
