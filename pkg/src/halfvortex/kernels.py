"""Stokes semigroup of the half-plane in vorticity form.

The kernel is K = G_t(x - y) - G_t(x - y*) - K0, where the boundary-layer part
K0 is evaluated pointwise from its one-dimensional (g' x Voigt) integral. Grid
operators work in x1-Fourier space: K0 depends on x1 - y1 only, and its x1
transform has a closed form in terms of erfc, which gives exact kernel slices
for every pair of rows.
"""
from functools import lru_cache
import math

import numpy as np
from scipy import fft as sfft
from scipy import integrate, special

from . import fields
from .fields import HALF, ScalarField, VectorField
from .specfun import gaussian_g, heat_G, poisson_P, voigt_V, voigt_grad

# Beyond this distance from the wall (in units of sqrt(t)) g is below 1e-18.
S_CUT = 13.0
_PANELS = 13
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_CHUNK = 20000


def _check_query(x2, y2, t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("kernel time must be positive")
    if np.any(np.asarray(x2) < 0) or np.any(np.asarray(y2) < 0):
        raise ValueError("kernel points must lie in the closed upper half-plane")


def _k0_unit(D, X2, Y2, grad=False):
    """K0 at t = 1 (and optionally its y-gradient) for flat arrays of equal length."""
    U = np.minimum(Y2, np.maximum(0.0, S_CUT - X2))
    frac = (np.arange(_PANELS)[:, None] + 0.5 * (_GL_X[None, :] + 1.0)).ravel() / _PANELS
    wq = np.tile(_GL_W, _PANELS) * 0.5 / _PANELS
    s = U[:, None] * frac[None, :]
    u = X2[:, None] + s
    ug = u * gaussian_g(u) * (U[:, None] * wq[None, :])
    b = Y2[:, None] - s
    d = np.broadcast_to(D[:, None], b.shape)
    val = np.sum(ug * voigt_V(d, b), axis=1)
    if not grad:
        return val
    d1, d2 = voigt_grad(d, b)
    gy1 = -np.sum(ug * d1, axis=1)
    edge = np.where(U >= Y2, (X2 + Y2) * gaussian_g(X2 + Y2) * gaussian_g(D), 0.0)
    gy2 = edge + np.sum(ug * d2, axis=1)
    return val, gy1, gy2


def _chunked(fn, arrays, nout):
    n = arrays[0].size
    outs = [np.empty(n) for _ in range(nout)]
    for a in range(0, n, _CHUNK):
        res = fn(*(arr[a:a + _CHUNK] for arr in arrays))
        res = res if nout > 1 else (res,)
        for o, r in zip(outs, res):
            o[a:a + _CHUNK] = r
    return outs


class QuadratureError(RuntimeError):
    """Adaptive kernel quadrature missed its tolerance; carries the achieved estimate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


def _k0_adaptive(D, X2, Y2, tol):
    U = min(Y2, max(0.0, S_CUT - X2))
    if U == 0.0:
        return 0.0

    def f(s):
        u = X2 + s
        return u * gaussian_g(u) * voigt_V(D, Y2 - s)

    val, err = integrate.quad(f, 0.0, U, epsabs=tol, epsrel=0.0, limit=200)
    if not err <= tol:
        raise QuadratureError(f"K0 quadrature reached only {err:.2e} at D={D}, X2={X2}, Y2={Y2}", err)
    return val


def kernel_K0(x1, x2, y1, y2, t, adaptive=False, tol=1e-10):
    """Boundary-layer kernel K0(x, y, t), rescaled to t = 1.

    The default integrates the (g' x Voigt) representation with fixed Gauss-Legendre
    panels (the integrand is smooth and Gaussian-damped). ``adaptive=True`` uses
    QUADPACK with absolute tolerance ``tol`` and raises QuadratureError otherwise.
    """
    x1, x2, y1, y2, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x1, x2, y1, y2, t)))
    _check_query(x2, y2, t)
    st = np.sqrt(t)
    if adaptive:
        Dm, X2m, Y2m = (x1 - y1) / st, x2 / st, y2 / st
        out = np.array([_k0_adaptive(a, b, c, tol * tt) for a, b, c, tt in
                        zip(Dm.ravel(), X2m.ravel(), Y2m.ravel(), t.ravel())])
        return (out / t.ravel()).reshape(x1.shape)
    D = ((x1 - y1) / st).ravel()
    (val,) = _chunked(lambda a, b, c: _k0_unit(a, b, c), [D, (x2 / st).ravel(), (y2 / st).ravel()], 1)
    return (val / t.ravel()).reshape(x1.shape)


def kernel_K0_unscaled(x1, x2, y1, y2, t, tol=1e-13):
    """K0 at time t straight from the time-t integrand, without the scaling law (scalar oracle).

    K0 = int_0^y2 (u/t) g_t(u) V_t(x1 - y1, y2 - s) ds with u = x2 + s,
    g_t(u) = exp(-u^2/4t)/sqrt(4 pi t) and V_t(a, b) = Re w((a + ib)/(2 sqrt t))/sqrt(4 pi t).
    """
    _check_query(x2, y2, t)
    c = 1.0 / math.sqrt(4 * math.pi * t)
    rt2 = 2.0 * math.sqrt(t)

    def f(s):
        u = x2 + s
        return u / t * c * math.exp(-u * u / (4 * t)) * c * special.wofz(complex(x1 - y1, y2 - s) / rt2).real

    if y2 == 0:
        return 0.0
    val, err = integrate.quad(f, 0.0, y2, epsabs=0.0, epsrel=tol, limit=400)
    return val


def kernel_K0_grad_y(x1, x2, y1, y2, t):
    """Analytic gradient of K0 with respect to the source point y."""
    x1, x2, y1, y2, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x1, x2, y1, y2, t)))
    _check_query(x2, y2, t)
    st = np.sqrt(t)
    D = ((x1 - y1) / st).ravel()
    _, g1, g2 = _chunked(lambda a, b, c: _k0_unit(a, b, c, grad=True),
                         [D, (x2 / st).ravel(), (y2 / st).ravel()], 3)
    scale = (t ** -1.5).ravel()
    return (g1 * scale).reshape(x1.shape), (g2 * scale).reshape(x1.shape)


def kernel_K1(x1, x2, y1, y2, t):
    return heat_G(np.asarray(x1) - y1, np.asarray(x2) - y2, t)


def kernel_K2(x1, x2, y1, y2, t):
    """K2 = -G_t(x - y*) - K0, the part of the kernel that enforces the wall condition."""
    return -heat_G(np.asarray(x1) - y1, np.asarray(x2) + y2, t) - kernel_K0(x1, x2, y1, y2, t)


def kernel_K(x1, x2, y1, y2, t):
    """Full Stokes kernel K = G_t(x - y) - G_t(x - y*) - K0."""
    return kernel_K1(x1, x2, y1, y2, t) + kernel_K2(x1, x2, y1, y2, t)


def ktilde_decomposition(x1, x2, y1, y2):
    """Split K0(x, y, 1) into 2 g(x2) P(x1 - y1, y2) and the remainder.

    Returns (leading, remainder, three_part) where three_part is the remainder
    rebuilt from its Voigt-minus-Poisson, mirror-Gaussian and integral pieces.
    """
    x1, x2, y1, y2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x1, x2, y1, y2)))
    D = x1 - y1
    leading = 2.0 * gaussian_g(x2) * poisson_P(D, y2)
    remainder = kernel_K0(x1, x2, y1, y2, 1.0) - leading
    part1 = 2.0 * gaussian_g(x2) * (voigt_V(D, y2) - poisson_P(D, y2))
    part2 = -2.0 * gaussian_g(x2 + y2) * gaussian_g(D)
    part3 = -2.0 * _g_dV_integral(D.ravel(), x2.ravel(), y2.ravel()).reshape(D.shape)
    return leading, remainder, part1 + part2 + part3


def _g_dV_integral(D, X2, Y2):
    U = np.minimum(Y2, np.maximum(0.0, S_CUT - X2))
    frac = (np.arange(_PANELS)[:, None] + 0.5 * (_GL_X[None, :] + 1.0)).ravel() / _PANELS
    wq = np.tile(_GL_W, _PANELS) * 0.5 / _PANELS
    s = U[:, None] * frac[None, :]
    b = Y2[:, None] - s
    _, d2 = voigt_grad(np.broadcast_to(D[:, None], b.shape), b)
    return np.sum(gaussian_g(X2[:, None] + s) * d2 * U[:, None] * wq[None, :], axis=1)


# ---------------------------------------------------------------- point vortex

def point_vortex_K0(grid, z, t):
    """K0(x, z, t) on every grid node: Voigt matrix (x1 by node) times Gaussian weights (node by x2)."""
    st = math.sqrt(t)
    Y2 = z[1] / st
    U = min(Y2, S_CUT)
    panels = max(1, int(math.ceil(U)))
    gx, gw = np.polynomial.legendre.leggauss(12)
    s = ((np.arange(panels)[:, None] + 0.5 * (gx[None, :] + 1.0)) * (U / panels)).ravel()
    w = np.tile(gw, panels) * 0.5 * U / panels
    D = (grid.x1 - z[0]) / st
    Vmat = voigt_V(D[:, None], Y2 - s[None, :])
    u = grid.x2[None, :] / st + s[:, None]
    W = w[:, None] * u * gaussian_g(u)
    return (Vmat @ W) / t


def stokes_point_vortex(grid, z, t):
    """S(t) delta_z sampled on a half-plane grid, i.e. K(., z, t)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if grid.kind != HALF:
        raise ValueError("point-vortex solutions live on half-plane grids")
    X1, X2 = grid.mesh()
    heat = heat_G(X1 - z[0], X2 - z[1], t) - heat_G(X1 - z[0], X2 + z[1], t)
    return ScalarField(grid, heat - point_vortex_K0(grid, z, t))


def stokes_point_vortex_parts(grid, z, t):
    """(K1, K2) sampled on the grid, so that S1 delta_z = K1 and S2 delta_z = K2."""
    X1, X2 = grid.mesh()
    k1 = heat_G(X1 - z[0], X2 - z[1], t)
    k2 = -heat_G(X1 - z[0], X2 + z[1], t) - point_vortex_K0(grid, z, t)
    return ScalarField(grid, k1), ScalarField(grid, k2)


# ---------------------------------------------------------------- grid operators

def _layer_profile(kappa, t, s):
    """H(k, s) with K0-hat(k; x2, y2) = H(k, x2 + y2) - H(k, x2) exp(-|k| y2)."""
    k = kappa[:, None]
    s = s[None, :]
    a = s / (2.0 * math.sqrt(t))
    b = k * math.sqrt(t)
    gauss = np.exp(-a * a - b * b) / math.sqrt(4.0 * math.pi * t)
    amb = a - b
    pos = amb >= 0
    with np.errstate(over="ignore", invalid="ignore"):
        tail = np.where(pos, np.exp(-a * a - b * b) * special.erfcx(np.where(pos, amb, 0.0)),
                        np.exp(-2.0 * a * b) * special.erfc(amb))
    return -2.0 * (gauss + 0.5 * k * tail)


def _layer_profile_dy(kappa, t, s):
    """H'(k, s) = -2 exp(-t k^2) g_t'(s), the Hankel part of the y2-derivative."""
    k = kappa[:, None]
    s = s[None, :]
    gt = np.exp(-s * s / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    return -2.0 * np.exp(-t * k * k) * (-s / (2.0 * t)) * gt


class HalfPlaneStokes:
    """Cached operators S, S0, S1, S2, S(t) div and the Dirichlet heat flow for one grid and time."""

    def __init__(self, grid, t):
        if grid.kind != HALF:
            raise ValueError("Stokes operators act on half-plane grids")
        if t <= 0:
            raise ValueError("t must be positive")
        if grid.n2 < 8:
            raise ValueError("need at least 8 rows")
        self.grid, self.t = grid, t
        n1, n2, h2 = grid.n1, grid.n2, grid.h2
        self.N1 = fields.fft_len_x1(n1)
        self.k = fields.x1_wavenumbers(grid, self.N1)
        self.kappa = np.abs(self.k)
        self.heat1 = np.exp(-t * self.k ** 2)[:, None]
        self.line = fields.HalfLineHeat(n2, h2, t)
        s = h2 * np.arange(2 * n2 - 1)
        self.H = _layer_profile(self.kappa, t, s)
        self.L = sfft.next_fast_len(3 * n2 - 2)
        self.Hf = sfft.fft(self.H, n=self.L, axis=1)
        self.Hpf = sfft.fft(_layer_profile_dy(self.kappa, t, s), n=self.L, axis=1)
        self.wy = fields.gregory_weights(n2, h2)
        self.sweeper = fields.ExpSweeper(n2, h2, self.kappa)

    # spectral plumbing
    def fwd(self, values):
        return fields.x1_forward(values, self.N1)

    def inv(self, hat):
        return fields.x1_inverse(hat, self.N1, self.grid.n1)

    def heat_hat(self, hat, sign, dx2=False):
        """Heat flow of Fourier rows: multiplier in x1, half-line product integration in x2.

        sign = -1 is the Dirichlet flow (odd extension), +1 the even extension
        and 0 the zero extension.
        """
        return self.heat1 * (hat @ self.line.matrix(sign, dx2).T)

    def _hankel(self, Hf, c):
        n2 = self.grid.n2
        cf = sfft.fft(c[:, ::-1], n=self.L, axis=1)
        return sfft.ifft(Hf * cf, axis=1)[:, n2 - 1:2 * n2 - 1]

    def layer_hat(self, hat):
        """x1-transform of S0 applied to a field given by its x1-transform."""
        hank = self._hankel(self.Hf, hat * self.wy[None, :])
        sep = self.sweeper.up_total(hat)
        return hank - self.H[:, :self.grid.n2] * sep[:, None]

    # public operators on raw arrays
    def dirichlet(self, v):
        return self.inv(self.heat_hat(self.fwd(v), -1)).real

    def S1(self, v):
        return self.inv(self.heat_hat(self.fwd(v), 0)).real

    def S0(self, v):
        return self.inv(self.layer_hat(self.fwd(v))).real

    def S(self, v):
        hat = self.fwd(v)
        return self.inv(self.heat_hat(hat, -1) - self.layer_hat(hat)).real

    def S2(self, v):
        hat = self.fwd(v)
        out = self.heat_hat(hat, -1) - self.layer_hat(hat) - self.heat_hat(hat, 0)
        return self.inv(out).real

    def S_div(self, F1, F2, part="S"):
        """S(t) div F = -int grad_y K . F dy; part 'S2' drops the whole-plane heat piece."""
        f1, f2 = self.fwd(F1), self.fwd(F2)
        ik = 1j * self.k[:, None]
        heat = ik * self.heat_hat(f1, -1) + self.heat_hat(f2, 1, dx2=True)
        comb = -ik * f1 - self.kappa[:, None] * f2
        layer = self.layer_hat(comb) + self._hankel(self.Hpf, f2 * self.wy[None, :])
        out = heat + layer
        if part != "S":
            # S1 div F: derivatives of the whole-plane heat flow of the zero extension
            s1 = ik * self.heat_hat(f1, 0) + self.heat_hat(f2, 0, dx2=True)
            out = out - s1 if part == "S2" else s1
        return self.inv(out).real


@lru_cache(maxsize=12)
def stokes_operator(grid, t):
    return HalfPlaneStokes(grid, float(t))


def _apply(name, omega0, t):
    op = stokes_operator(omega0.grid, float(t))
    return ScalarField(omega0.grid, getattr(op, name)(omega0.values))


def apply_dirichlet_heat(omega0, t):
    """Heat flow with zero boundary values: heat-convolve the odd extension, keep x2 >= 0."""
    return _apply("dirichlet", omega0, t)


def apply_S1(omega0, t):
    """Whole-plane heat flow of the zero extension, restricted to the half-plane."""
    return _apply("S1", omega0, t)


def apply_S0(omega0, t):
    return _apply("S0", omega0, t)


def apply_S(omega0, t):
    """Stokes semigroup S(t) = Dirichlet heat flow minus the boundary-layer operator S0."""
    return _apply("S", omega0, t)


def apply_S2(omega0, t):
    return _apply("S2", omega0, t)


def apply_S_div(F, t, part="S"):
    """S(t) div F computed as -int grad_y K(x, y, t) . F(y) dy."""
    op = stokes_operator(F.grid, float(t))
    return ScalarField(F.grid, op.S_div(F.u1, F.u2, part=part))


def trace_gamma_hat(omega, n_fft=None):
    g = omega.grid
    n_fft = n_fft or fields.fft_len_x1(g.n1)
    kappa = fields.x1_wavenumbers(g, n_fft)
    hat = fields.x1_forward(omega.values, n_fft)
    return fields.ExpSweeper(g.n2, g.h2, kappa).up_total(hat)


def trace_gamma(omega):
    """gamma[omega](x1) = (1/pi) int y2/((x1 - y1)^2 + y2^2) omega(y) dy on the grid's x1 axis.

    The x1 convolution with the Poisson kernel is the multiplier exp(-|k| y2),
    integrated in y2 against the cubic interpolant of each Fourier row.
    """
    if omega.grid.kind != HALF:
        raise ValueError("the trace functional acts on half-plane fields")
    g = omega.grid
    n_fft = fields.fft_len_x1(g.n1)
    return fields.x1_inverse(trace_gamma_hat(omega, n_fft), n_fft, g.n1)
