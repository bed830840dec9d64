"""Numerical laboratory for coagulation equations with homogeneity-one kernels.

Kernels, spectral stability functions, the diagonal-kernel Burgers lattice,
the exponential-variable simulator and closed-form reference profiles.
"""

__version__ = "0.1.0"
