"""Lamb-Oseen vortex, self-similar variables and the linearized flow around it.

In self-similar variables xi = (x - z)/sqrt(t), tau = log(t/t0) the
linearization at the Oseen vortex is autonomous,
    d_tau w = (L - alpha Lambda) w,
    L w = Delta w + xi.grad(w)/2 + w,
    Lambda w = v^G.grad(w) + BS[w].grad(G),
with G(xi) = exp(-|xi|^2/4)/(4 pi) and v^G = BS[G].
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import fft as sfft

from . import fields
from .biot_savart import DEFAULT, bs_plane, oseen_velocity_profile
from .fields import WHOLE, ScalarField, VectorField


class ClippingWarning(UserWarning):
    """A resampling dropped vorticity that falls outside the target box."""


class PicardDivergence(RuntimeError):
    def __init__(self, message, ratios):
        super().__init__(message)
        self.ratios = ratios


@dataclass(frozen=True)
class OseenParams:
    alpha: float
    z: tuple = (0.0, 1.0)

    def __post_init__(self):
        if not self.z[1] > 0:
            raise ValueError("the vortex centre must lie inside the half-plane")


@dataclass(frozen=True)
class SelfSimilarFrame:
    t0: float
    z: tuple = (0.0, 1.0)

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("reference time must be positive")


def selfsimilar_grid(L=12.0, n=128):
    """Square whole-plane grid [-L, L]^2 for functions of xi."""
    return fields.GridSpec(-L, L, -L, L, n, n, WHOLE)


def gaussian_G(xi1, xi2):
    return np.exp(-(xi1 * xi1 + xi2 * xi2) / 4.0) / (4.0 * math.pi)


def gaussian_G_grad(xi1, xi2):
    g = gaussian_G(xi1, xi2)
    return -0.5 * xi1 * g, -0.5 * xi2 * g


def oseen_vorticity(p, grid, t):
    """alpha G_t(x - z) = (alpha/t) G((x - z)/sqrt(t))."""
    if t <= 0:
        raise ValueError("t must be positive")
    X1, X2 = grid.mesh()
    rt = math.sqrt(t)
    return ScalarField(grid, p.alpha / t * gaussian_G((X1 - p.z[0]) / rt, (X2 - p.z[1]) / rt))


def oseen_velocity(p, grid, t):
    """(alpha/sqrt(t)) v^G((x - z)/sqrt(t))."""
    if t <= 0:
        raise ValueError("t must be positive")
    X1, X2 = grid.mesh()
    rt = math.sqrt(t)
    v1, v2 = oseen_velocity_profile((X1 - p.z[0]) / rt, (X2 - p.z[1]) / rt)
    return VectorField(grid, p.alpha / rt * v1, p.alpha / rt * v2)


# ---------------------------------------------------------------- resampling

def _clip_check(f, lo1, hi1, lo2, hi2, what):
    """Warn when part of f lies outside the source-space box that the target covers."""
    X1, X2 = f.grid.mesh()
    out = (X1 < lo1) | (X1 > hi1) | (X2 < lo2) | (X2 > hi2)
    a = fields.cell_weights(f.grid) * np.abs(f.values)
    lost = float(np.sum(a[out]))
    total = float(np.sum(a))
    if total > 0 and lost > 1e-8 * total:
        warnings.warn(f"{what}: {lost / total:.1e} of the L1 mass falls outside the target box",
                      ClippingWarning, stacklevel=3)


def to_selfsimilar(omega, frame, t, target=None):
    """w(xi) = t omega(z + sqrt(t) xi) sampled on a xi grid."""
    target = target or selfsimilar_grid()
    rt = math.sqrt(t)
    z = frame.z
    _clip_check(omega, z[0] + rt * target.x1_min, z[0] + rt * target.x1_max,
                z[1] + rt * target.x2_min, z[1] + rt * target.x2_max, "to_selfsimilar")
    X1, X2 = target.mesh()
    return ScalarField(target, t * fields.sample(omega, z[0] + rt * X1, z[1] + rt * X2))


def from_selfsimilar(w, frame, tau, target):
    """omega(x) = w((x - z)/sqrt(t))/t with t = t0 exp(tau), sampled on a physical grid."""
    t = frame.t0 * math.exp(tau)
    rt = math.sqrt(t)
    z = frame.z
    _clip_check(w, (target.x1_min - z[0]) / rt, (target.x1_max - z[0]) / rt,
                (target.x2_min - z[1]) / rt, (target.x2_max - z[1]) / rt, "from_selfsimilar")
    X1, X2 = target.mesh()
    return ScalarField(target, fields.sample(w, (X1 - z[0]) / rt, (X2 - z[1]) / rt) / t)


# ---------------------------------------------------------------- operators

def _centered(v, h, axis):
    p = np.zeros_like(v)
    m = np.zeros_like(v)
    if axis == 0:
        p[:-1], m[1:] = v[1:], v[:-1]
    else:
        p[:, :-1], m[:, 1:] = v[:, 1:], v[:, :-1]
    return p, m


def apply_Lcal(w):
    """L w = Delta w + xi.grad(w)/2 + w with centred second-order differences (zero outside the box)."""
    g = w.grid
    v = w.values
    p1, m1 = _centered(v, g.h1, 0)
    p2, m2 = _centered(v, g.h2, 1)
    lap = (p1 - 2 * v + m1) / g.h1 ** 2 + (p2 - 2 * v + m2) / g.h2 ** 2
    X1, X2 = g.mesh()
    adv = 0.5 * (X1 * (p1 - m1) / (2 * g.h1) + X2 * (p2 - m2) / (2 * g.h2))
    return ScalarField(g, lap + adv + v)


class _Spectral:
    """Zero-padded 2D FFT plumbing for a whole-plane xi grid."""

    def __init__(self, grid, n1=None, n2=None):
        self.grid = grid
        self.N1 = sfft.next_fast_len(max(2 * grid.n1, n1 or 0))
        self.N2 = sfft.next_fast_len(max(2 * grid.n2, n2 or 0))
        self.k1 = 2 * np.pi * np.fft.fftfreq(self.N1, grid.h1)[:, None]
        self.k2 = 2 * np.pi * np.fft.fftfreq(self.N2, grid.h2)[None, :]

    def fwd(self, v):
        return sfft.fft2(v, s=(self.N1, self.N2))

    def inv(self, spec):
        return sfft.ifft2(spec)[:self.grid.n1, :self.grid.n2].real

    def grad(self, v):
        s = self.fwd(v)
        return self.inv(1j * self.k1 * s), self.inv(1j * self.k2 * s)


_SPECTRAL = {}


def _spectral(grid, n1=None, n2=None):
    key = (grid, n1, n2)
    if key not in _SPECTRAL:
        _SPECTRAL[key] = _Spectral(grid, n1, n2)
    return _SPECTRAL[key]


def apply_Lambda(w, cfg=DEFAULT):
    """Lambda w = v^G.grad(w) + BS[w].grad(G), gradients of w by FFT, v^G and grad G in closed form."""
    g = w.grid
    if g.kind != WHOLE:
        raise ValueError("Lambda acts on whole-plane fields")
    X1, X2 = g.mesh()
    d1, d2 = _spectral(g).grad(w.values)
    vg1, vg2 = oseen_velocity_profile(X1, X2)
    u = bs_plane(w, cfg)
    G1, G2 = gaussian_G_grad(X1, X2)
    return ScalarField(g, vg1 * d1 + vg2 * d2 + u.u1 * G1 + u.u2 * G2)


def divergence(F):
    """Spectral divergence of a whole-plane vector field on the zero-padded box."""
    sp = _spectral(F.grid)
    d1, _ = sp.grad(F.u1)
    _, d2 = sp.grad(F.u2)
    return ScalarField(F.grid, d1 + d2)


def weighted_inner(a, b):
    """<a, b>_Y = int a b exp(|xi|^2/4) d xi (trapezoid on the box)."""
    X1, X2 = a.grid.mesh()
    return float(np.sum(fields.cell_weights(a.grid) * a.values * b.values * np.exp((X1 ** 2 + X2 ** 2) / 4.0)))


def _trig_eval_matrix(n_fft, h, x_min, points):
    """Rows that evaluate the real trigonometric interpolant of FFT data at arbitrary points."""
    k = 2 * np.pi * np.fft.fftfreq(n_fft, h)
    E = np.exp(1j * np.outer(points - x_min, k))
    if n_fft % 2 == 0:
        # the unpaired Nyquist mode interpolates as a cosine
        E[:, n_fft // 2] = np.cos(k[n_fft // 2] * (points - x_min))
    return E / n_fft


def apply_S0_explicit(w0, tau):
    """S_0(tau) w0 (xi) = e^tau [exp((e^tau - 1) Delta) w0](e^{tau/2} xi).

    The heat flow is an exact Fourier multiplier on the zero-padded box and the
    dilated samples are read off the trigonometric interpolant, row by column.
    The zero margin is wide enough that the heat flow does not wrap around
    (Gaussian tail below e^-40), and points that dilate beyond it are set to zero.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    g = w0.grid
    if tau == 0:
        return w0
    s = math.expm1(tau)
    reach = math.sqrt(160.0 * s)
    sp = _spectral(g, g.n1 + int(math.ceil(2 * reach / g.h1)), g.n2 + int(math.ceil(2 * reach / g.h2)))
    spec = sp.fwd(w0.values) * np.exp(-s * (sp.k1 ** 2 + sp.k2 ** 2))
    sc = math.exp(tau / 2)
    p1, p2 = sc * g.x1, sc * g.x2
    A = _trig_eval_matrix(sp.N1, g.h1, g.x1_min, p1)
    B = _trig_eval_matrix(sp.N2, g.h2, g.x2_min, p2)
    # the padded period holds the box plus a zero margin split evenly on both sides
    m1 = 0.5 * (sp.N1 * g.h1 - (g.x1_max - g.x1_min))
    m2 = 0.5 * (sp.N2 * g.h2 - (g.x2_max - g.x2_min))
    A[(p1 < g.x1_min - m1) | (p1 > g.x1_max + m1)] = 0.0
    B[(p2 < g.x2_min - m2) | (p2 > g.x2_max + m2)] = 0.0
    out = (A @ spec @ B.T).real
    return ScalarField(g, math.exp(tau) * out)


def _advect(w, alpha, dtau, cfg):
    """One RK4 step of d_tau w = -alpha Lambda w."""
    def rhs(v):
        return -alpha * apply_Lambda(ScalarField(w.grid, v), cfg).values
    v = w.values
    k1 = rhs(v)
    k2 = rhs(v + 0.5 * dtau * k1)
    k3 = rhs(v + 0.5 * dtau * k2)
    k4 = rhs(v + dtau * k3)
    return ScalarField(w.grid, v + dtau / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def _evolve_split(w0, alpha, tau_end, nsteps, cfg):
    dt = tau_end / nsteps
    w = w0
    for _ in range(nsteps):
        w = apply_S0_explicit(w, 0.5 * dt)
        if alpha:
            w = _advect(w, alpha, dt, cfg)
        w = apply_S0_explicit(w, 0.5 * dt)
    return w


def _evolve_picard(w0, alpha, tau_end, nsteps, cfg, max_iter=30, tol=1e-10):
    """Fixed point of w = S_0(tau) w0 - alpha int_0^tau S_0(tau - s) Lambda w(s) ds.

    Trapezoid rule in s on a uniform grid; returns (w(tau_end), ratios) where
    ratios are successive-difference ratios of the iteration.
    """
    taus = np.linspace(0.0, tau_end, nsteps + 1)
    base = [apply_S0_explicit(w0, tt) for tt in taus]
    traj = list(base)
    ratios, prev, grow = [], None, 0
    for _ in range(max_iter):
        lam = [apply_Lambda(w, cfg) for w in traj]
        new = [base[0]]
        for n in range(1, nsteps + 1):
            acc = np.zeros(w0.grid.shape)
            ds = taus[1] - taus[0]
            for j in range(n + 1):
                q = 0.5 * ds if j in (0, n) else ds
                acc += q * apply_S0_explicit(lam[j], taus[n] - taus[j]).values
            new.append(ScalarField(w0.grid, base[n].values - alpha * acc))
        diff = max(fields.lp_norm(a - b, 1) for a, b in zip(new, traj))
        traj = new
        if prev is not None and prev > 0:
            r = diff / prev
            ratios.append(r)
            grow = grow + 1 if r >= 1 else 0
            if grow >= 3:
                raise PicardDivergence(f"Picard iteration is not contracting (ratio {r:.3g})", ratios)
        prev = diff
        if diff <= tol:
            break
    return traj[-1], ratios


def evolve_S_alpha(w0, alpha, tau_end, nsteps=20, method="split", cfg=DEFAULT):
    """S_alpha(tau_end) w0 for d_tau w = (L - alpha Lambda) w.

    method "split": Strang splitting, exact S_0 half steps around an RK4 step
    of the advection. method "picard": Duhamel fixed point on a uniform grid.
    """
    if tau_end <= 0:
        raise ValueError("tau_end must be positive")
    if w0.grid.kind != WHOLE:
        raise ValueError("S_alpha acts on whole-plane fields")
    if method == "split":
        return _evolve_split(w0, alpha, tau_end, nsteps, cfg)
    if method == "picard":
        return _evolve_picard(w0, alpha, tau_end, nsteps, cfg)[0]
    raise ValueError(f"unknown method {method!r}")


def apply_Sigma_alpha(omega0, t0, t, p, nsteps=None, xi_grid=None, target=None, cfg=DEFAULT):
    """Sigma_alpha(t, t0) omega0 in physical variables, by conjugation with S_alpha.

    omega0 is resampled to w0(xi) = t0 omega0(z + sqrt(t0) xi), evolved for
    tau = log(t/t0) and mapped back to ``target`` (default: omega0's grid).
    """
    if not 0 < t0 < t:
        raise ValueError("need 0 < t0 < t")
    frame = SelfSimilarFrame(t0, p.z)
    xi_grid = xi_grid or selfsimilar_grid()
    tau = math.log(t / t0)
    nsteps = nsteps or max(4, int(math.ceil(tau / 0.05)))
    w0 = to_selfsimilar(omega0, frame, t0, xi_grid)
    w = evolve_S_alpha(w0, p.alpha, tau, nsteps, "split", cfg)
    return from_selfsimilar(w, frame, tau, target or omega0.grid)
