"""Velocity from vorticity in the plane and in the half-plane.

The fast path transforms in x1 and solves each Fourier mode with the exact
one-dimensional Green's function exp(-|k||x2 - y2|)/(2|k|), integrated against
a cubic interpolant of the data in x2. A Gaussian carrying the field's total
circulation is split off first and its velocity added in closed form, so the
periodic x1 transform only sees a zero-mass remainder.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import fields
from .fields import HALF, WHOLE, ScalarField, VectorField

FFT_POISSON = "FFTPoisson"
DIRECT_SUM = "DirectSum"
MASS_THRESHOLD = 1e-12


@dataclass(frozen=True)
class BiotSavartConfig:
    method: str = FFT_POISSON
    desingularization_radius: float = 0.0

    def __post_init__(self):
        if self.method not in (FFT_POISSON, DIRECT_SUM):
            raise ValueError(f"unknown Biot-Savart method {self.method!r}")
        if self.desingularization_radius < 0:
            raise ValueError("desingularization radius must be >= 0")


DEFAULT = BiotSavartConfig()


def oseen_velocity_profile(xi1, xi2):
    """v^G(xi) = xi_perp/(2 pi |xi|^2) (1 - exp(-|xi|^2/4)), the velocity of the unit Gaussian G."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    r2 = xi1 * xi1 + xi2 * xi2
    small = r2 < 1e-8
    safe = np.where(small, 1.0, r2)
    f = np.where(small, 0.25 - r2 / 32.0, -np.expm1(-safe / 4.0) / safe) / (2.0 * math.pi)
    return -xi2 * f, xi1 * f


def gaussian_velocity(x1, x2, c, s):
    """Velocity of the heat kernel G_s(x - c), i.e. v^G((x - c)/sqrt(s))/sqrt(s)."""
    rs = math.sqrt(s)
    v1, v2 = oseen_velocity_profile((x1 - c[0]) / rs, (x2 - c[1]) / rs)
    return v1 / rs, v2 / rs


def _profile_slope(q):
    """f(q) = (1 - exp(-q/4))/(2 pi q) and f'(q), with series near q = 0."""
    small = q < 1e-3
    qs = np.where(small, 1.0, q)
    e = np.exp(-qs / 4.0)
    f = np.where(small, 0.25 - q / 32.0 + q * q / 384.0, -np.expm1(-qs / 4.0) / qs)
    df = np.where(small, -1.0 / 32.0 + q / 192.0, (0.25 * qs * e + np.expm1(-qs / 4.0)) / (qs * qs))
    return f / (2.0 * math.pi), df / (2.0 * math.pi)


def gaussian_velocity_grad(x1, x2, c, s):
    """x-derivatives of gaussian_velocity: ((d1 v1, d2 v1), (d1 v2, d2 v2))."""
    y1, y2 = x1 - c[0], x2 - c[1]
    f, df = _profile_slope((y1 * y1 + y2 * y2) / s)
    f, df = f / s, df / (s * s)
    # v = (-y2, y1) f(|y|^2/s)/s
    d1v1 = -y2 * 2.0 * y1 * df
    d2v1 = -f - y2 * 2.0 * y2 * df
    d1v2 = f + y1 * 2.0 * y1 * df
    d2v2 = y1 * 2.0 * y2 * df
    return (d1v1, d2v1), (d1v2, d2v2)


def _gauss(x1, x2, c, s):
    return np.exp(-((x1 - c[0]) ** 2 + (x2 - c[1]) ** 2) / (4.0 * s)) / (4.0 * math.pi * s)


def _gauss_grad(x1, x2, c, s):
    g = _gauss(x1, x2, c, s)
    return -(x1 - c[0]) / (2.0 * s) * g, -(x2 - c[1]) / (2.0 * s) * g


# ---------------------------------------------------------------- mode-wise solver

def _support_rows(grid, values, support):
    """First and last row of the x2 band that carries the field.

    With ``support=None`` the band is the nonzero rows plus one zero row on
    either side (a smooth field that vanishes there). An explicit interval
    (a, b) declares the field zero outside it, so its edges may be jumps.
    """
    n2 = grid.n2
    if support is None:
        rows = np.flatnonzero(np.any(values != 0.0, axis=0))
        if rows.size == 0:
            return None
        lo, hi = max(int(rows[0]) - 1, 0), min(int(rows[-1]) + 1, n2 - 1)
    else:
        tol = 1e-9 * grid.h2
        inside = np.flatnonzero((grid.x2 >= support[0] - tol) & (grid.x2 <= support[1] + tol))
        if inside.size == 0:
            return None
        lo, hi = int(inside[0]), int(inside[-1])
    while hi - lo < 3:
        lo, hi = max(lo - 1, 0), min(hi + 1, n2 - 1)
    return lo, hi


def _band_sweeps(grid, hat, kappa, lo, hi):
    """Up/down sweeps of the rows lo..hi of hat, continued as exponentials to all rows."""
    nk, n2 = hat.shape
    up = np.zeros((nk, n2), dtype=complex)
    down = np.zeros((nk, n2), dtype=complex)
    while hi - lo < 3:
        lo, hi = max(lo - 1, 0), min(hi + 1, n2 - 1)
    sw = fields.ExpSweeper(hi - lo + 1, grid.h2, kappa)
    u, d = sw.sweeps(hat[:, lo:hi + 1])
    up[:, lo:hi + 1] = u
    down[:, lo:hi + 1] = d
    x2 = grid.x2
    if lo > 0:
        up[:, :lo] = np.exp(-kappa[:, None] * (x2[lo] - x2[None, :lo])) * u[:, :1]
    if hi < n2 - 1:
        down[:, hi + 1:] = np.exp(-kappa[:, None] * (x2[None, hi + 1:] - x2[hi])) * d[:, -1:]
    return up, down


def _mode_sweeps(grid, values, n_fft, support=None, outside=None):
    """Fourier rows of the field and the up/down exponential sweeps on all grid rows.

    Sweeps run only across the band of rows that carries the field; beyond it
    the integrals are pure exponentials, so a declared edge (such as the wall of
    a zero extension) is never interpolated across. ``outside`` holds values
    for the rows beyond an explicit support band; each side is swept on its own
    so the jump at the band edge stays sharp.
    """
    kappa = fields.x1_wavenumbers(grid, n_fft)
    hat = fields.x1_forward(values, n_fft)
    sup = _support_rows(grid, values, support)
    if sup is None:
        z = np.zeros(hat.shape, dtype=complex)
        return kappa, z, z.copy()
    lo, hi = sup
    up, down = _band_sweeps(grid, hat, kappa, lo, hi)
    if outside is not None:
        ohat = fields.x1_forward(outside, n_fft)
        if lo > 0:
            u, d = _band_sweeps(grid, ohat, kappa, 0, lo)
            up, down = up + u, down + d
        if hi < grid.n2 - 1:
            u, d = _band_sweeps(grid, ohat, kappa, hi, grid.n2 - 1)
            up, down = up + u, down + d
    return kappa, up, down


def _velocity_hat(kappa, up, down):
    # rfft wavenumbers are >= 0, so -(ik/2|k|) reduces to -i/2; the mean mode carries no u2
    u1 = 0.5 * (up - down)
    u2 = np.where(kappa[:, None] > 0, -0.5j * (up + down), 0.0)
    return u1, u2


def _multipole(grid, values, centre=None):
    """Mass, dipole moment, centre and Gaussian time for the far-field split.

    Centre and width come from the first two moments of |omega| (meaningful for
    mixed-sign fields), with the centre kept in the middle half of the box and
    sqrt(width) between two cells and a sixteenth of the box.
    """
    w = fields.cell_weights(grid)
    a = w * np.abs(values)
    am = float(np.sum(a))
    if am <= MASS_THRESHOLD:
        return None
    X1, X2 = grid.mesh()
    q1 = 0.25 * (grid.x1_max - grid.x1_min)
    q2 = 0.25 * (grid.x2_max - grid.x2_min)
    c1 = float(np.clip(np.sum(a * X1) / am, grid.x1_min + q1, grid.x1_max - q1))
    if centre is None:
        c2 = float(np.clip(np.sum(a * X2) / am, grid.x2_min + q2, grid.x2_max - q2))
    else:
        c2 = centre
    s = float(np.sum(a * ((X1 - c1) ** 2 + (X2 - c2) ** 2))) / (4.0 * am)
    s = float(np.clip(s, (2.0 * max(grid.h1, grid.h2)) ** 2, (min(q1, q2) / 4.0) ** 2))
    wv = w * values
    m = float(np.sum(wv))
    p = (float(np.sum(wv * (X1 - c1))), float(np.sum(wv * (X2 - c2))))
    return m, p, (c1, c2), s


def _split_far_field(grid, values, m, p, c, s):
    """Subtract m G_s + dipole from the samples; return the remainder and the analytic velocity."""
    X1, X2 = grid.mesh()
    g1, g2 = _gauss_grad(X1, X2, c, s)
    # the dipole field -p . grad G_s has first moment p and no mass
    model = m * _gauss(X1, X2, c, s) - p[0] * g1 - p[1] * g2
    v1, v2 = gaussian_velocity(X1, X2, c, s)
    (a11, a12), (a21, a22) = gaussian_velocity_grad(X1, X2, c, s)
    u1 = m * v1 - p[0] * a11 - p[1] * a12
    u2 = m * v2 - p[0] * a21 - p[1] * a22
    return values - model, u1, u2


def _spectral_plane(grid, values, support=None, outside=None):
    n_fft = fields.fft_len_x1(grid.n1)
    kappa, up, down = _mode_sweeps(grid, values, n_fft, support, outside)
    u1, u2 = _velocity_hat(kappa, up, down)
    return fields.x1_inverse(u1, n_fft, grid.n1), fields.x1_inverse(u2, n_fft, grid.n1)


def bs_plane(omega, cfg=DEFAULT, support=None):
    """Whole-plane Biot-Savart velocity u = grad_perp (Laplacian)^-1 omega.

    ``support`` = (a, b) declares omega zero outside a <= x2 <= b, e.g. (0, inf)
    for a zero extension of a half-plane field, which jumps at the wall.
    """
    g = omega.grid
    if g.kind != WHOLE:
        raise ValueError("bs_plane expects a whole-plane field")
    if cfg.method == DIRECT_SUM:
        return direct_sum(omega, cfg.desingularization_radius)
    mp = _multipole(g, omega.values)
    if mp is None:
        return VectorField(g, np.zeros(g.shape), np.zeros(g.shape))
    rest, a1, a2 = _split_far_field(g, omega.values, *mp)
    outside = None
    if support is not None:
        # beyond the band omega is zero, so the remainder there is minus the model;
        # the band-edge rows carry the one-sided limit from outside
        outside = rest - omega.values
    u1, u2 = _spectral_plane(g, rest, support, outside)
    return VectorField(g, u1 + a1, u2 + a2)


def bs_halfplane(omega, cfg=DEFAULT):
    """Half-plane Biot-Savart law: the odd-image pair G(x - y) - G(x - y*) applied to omega.

    Mode by mode the image contribution is exp(-|k| x2) times the wall integral
    of exp(-|k| y2) omega-hat, which cancels u2 on x2 = 0 exactly.
    """
    g = omega.grid
    if g.kind != HALF:
        raise ValueError("bs_halfplane expects a half-plane field")
    if cfg.method == DIRECT_SUM:
        return direct_sum(omega, cfg.desingularization_radius)
    mp = _multipole(g, omega.values, centre=0.0)
    if mp is None:
        return VectorField(g, np.zeros(g.shape), np.zeros(g.shape))
    # The odd extension has no mass and no x1-dipole; its x2-dipole is twice
    # the half-plane moment. A wall-centred dipole Gaussian is odd in x2, so the
    # half-plane law applied to it equals its whole-plane velocity.
    _, p, c, s = mp
    rest, a1, a2 = _split_far_field(g, omega.values, 0.0, (0.0, 2.0 * p[1]), c, s)
    n_fft = fields.fft_len_x1(g.n1)
    kappa, up, down = _mode_sweeps(g, rest, n_fft)
    u1, u2 = _velocity_hat(kappa, up, down)
    wall = up[:, :1] * np.exp(-kappa[:, None] * g.x2[None, :])
    u1 = u1 + 0.5 * wall
    k = kappa[:, None]
    u2 = u2 + np.where(k > 0, 0.5j * wall, 0.0)
    u1 = fields.x1_inverse(u1, n_fft, g.n1) + a1
    u2 = fields.x1_inverse(u2, n_fft, g.n1) + a2
    return VectorField(g, u1, u2)


def mirror_correction(omega_whole, cfg=DEFAULT):
    """BS_+[omega] - BS[omega] on the half-plane for a whole-plane field omega.

    The half-plane law is applied to the restriction of omega; the whole-plane
    law sees omega everywhere, including x2 < 0.
    """
    half = fields.restrict_half(omega_whole)
    return bs_halfplane(half, cfg) - fields.restrict_half_vector(bs_plane(omega_whole, cfg))


def direct_sum(omega, radius=0.0, targets=None):
    """O(N^2) Biot-Savart sum with trapezoid weights (oracle).

    The self-cell term is zero, which is the exact integral of the odd kernel
    over the node's square cell. ``radius`` > 0 smooths the kernel by
    1 - exp(-r^2/radius^2). Half-plane fields get the image kernel as well.
    ``targets`` is an optional (x1, x2) pair of arrays; defaults to the grid.
    """
    g = omega.grid
    X1, X2 = g.mesh()
    w = fields.cell_weights(g) * omega.values
    keep = w != 0.0
    y1, y2, wy = X1[keep], X2[keep], w[keep]
    if targets is None:
        t1, t2 = X1.ravel(), X2.ravel()
    else:
        t1, t2 = (np.asarray(a, dtype=float).ravel() for a in targets)
    out1 = np.zeros(t1.size)
    out2 = np.zeros(t1.size)
    images = [(1.0, y2)] + ([(-1.0, -y2)] if g.kind == HALF else [])
    for a in range(0, t1.size, 2048):
        d1 = t1[a:a + 2048, None] - y1[None, :]
        for sign, yy in images:
            d2 = t2[a:a + 2048, None] - yy[None, :]
            r2 = d1 * d1 + d2 * d2
            with np.errstate(divide="ignore", invalid="ignore"):
                kern = np.where(r2 > 0, 1.0 / (2.0 * math.pi * r2), 0.0)
            if radius > 0:
                kern = kern * -np.expm1(-r2 / radius ** 2)
            out1[a:a + 2048] += sign * np.sum(-d2 * kern * wy[None, :], axis=1)
            out2[a:a + 2048] += sign * np.sum(d1 * kern * wy[None, :], axis=1)
    if targets is not None:
        return out1, out2
    return VectorField(g, out1.reshape(g.shape), out2.reshape(g.shape))
