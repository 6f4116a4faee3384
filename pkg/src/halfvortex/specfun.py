"""Scalar special functions behind the boundary-layer kernel.

Everything is vectorized over numpy arrays. The viscosity is normalized to one.
"""
import numpy as np
from scipy import special

SQRT_PI = np.sqrt(np.pi)
INV_SQRT_4PI = 1.0 / np.sqrt(4.0 * np.pi)


def _check_finite(*arrays):
    for a in arrays:
        if np.any(np.isnan(a)):
            raise ValueError("NaN input")


def faddeeva_w(z):
    """w(z) = exp(-z^2) erfc(-iz) on the closed upper half-plane.

    Raises ValueError if some Im(z) < 0.
    """
    z = np.asarray(z, dtype=complex)
    _check_finite(z)
    if np.any(z.imag < 0):
        raise ValueError("faddeeva_w is only used for Im(z) >= 0")
    return special.wofz(z)


def faddeeva_dw(z):
    """Derivative w'(z) = -2 z w(z) + 2i/sqrt(pi)."""
    z = np.asarray(z, dtype=complex)
    return -2.0 * z * faddeeva_w(z) + 2j / SQRT_PI


def erfc(x):
    return special.erfc(x)


def gaussian_g(x1):
    """One-dimensional heat kernel at time 1: exp(-x1^2/4)/sqrt(4 pi)."""
    x1 = np.asarray(x1, dtype=float)
    return np.exp(-0.25 * x1 * x1) * INV_SQRT_4PI


def gaussian_dg(x1):
    """g'(x1) = -(x1/2) g(x1)."""
    x1 = np.asarray(x1, dtype=float)
    return -0.5 * x1 * gaussian_g(x1)


def heat_G(x1, x2, t):
    """Heat kernel G_t(x) = exp(-|x|^2/4t)/(4 pi t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("heat_G needs t > 0")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.exp(-(x1 * x1 + x2 * x2) / (4.0 * t)) / (4.0 * np.pi * t)


def poisson_P(x1, x2):
    """Poisson kernel of the half-plane, P(x) = x2/(pi |x|^2), for x2 > 0."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any(x2 <= 0):
        raise ValueError("poisson_P needs x2 > 0")
    return x2 / (np.pi * (x1 * x1 + x2 * x2))


def voigt_V(x1, x2):
    """Voigt function V(x) = Re w((x1 + i x2)/2)/sqrt(4 pi), the x1-convolution of g with P.

    On x2 = 0 the smooth limit g(x1) is returned.
    """
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    _check_finite(x1, x2)
    if np.any(x2 < 0):
        raise ValueError("voigt_V needs x2 >= 0")
    out = special.wofz(0.5 * (x1 + 1j * x2)).real * INV_SQRT_4PI
    return np.where(x2 == 0.0, gaussian_g(x1), out)


def voigt_grad(x1, x2):
    """Analytic gradient (dV/dx1, dV/dx2) from the w' relation."""
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    _check_finite(x1, x2)
    if np.any(x2 < 0):
        raise ValueError("voigt_grad needs x2 >= 0")
    zeta = 0.5 * (x1 + 1j * x2)
    dw = -2.0 * zeta * special.wofz(zeta) + 2j / SQRT_PI
    return 0.5 * dw.real * INV_SQRT_4PI, -0.5 * dw.imag * INV_SQRT_4PI
