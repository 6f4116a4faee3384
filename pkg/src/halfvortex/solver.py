"""Nonlinear evolution of a point vortex above a no-slip wall.

march_mild integrates the mild (Duhamel) form
    omega(t) = alpha S(t) delta_z - int_0^t S(t - s) div(u omega)(s) ds.
The linear part alpha S(t) delta_z is evaluated analytically at every time
level and only the deviation d = omega - alpha S(t) delta_z is propagated. The
self-advection of the Oseen core, u1bar omega1bar, is divergence free and is
removed from the flux exactly, so the flux F = u omega - u1bar omega1bar stays
bounded as t -> 0.

picard_decomposed iterates the split system in which the Oseen part and its
correction omega1hat live in the whole plane (carried in self-similar
variables) and the wall part omega2 lives on the half-plane grid.
"""
from dataclasses import dataclass, field
import math
import os
import warnings

import numpy as np
from scipy import fft as sfft

from . import diagnostics, fields
from .biot_savart import bs_halfplane, bs_plane, oseen_velocity_profile
from .fields import HALF, WHOLE, GridSpec, ScalarField, VectorField
from .kernels import point_vortex_K0, stokes_operator, stokes_point_vortex_parts
from .oseen import (PicardDivergence, apply_S0_explicit, divergence, evolve_S_alpha, gaussian_G,
                    selfsimilar_grid)


class CFLError(RuntimeError):
    """A time step would move vorticity more than cfl cells; carries a suggested step count."""

    def __init__(self, message, suggested_nsteps):
        super().__init__(message)
        self.suggested_nsteps = suggested_nsteps


@dataclass(frozen=True)
class PicardConfig:
    max_iter: int = 12
    tol: float = 1e-6
    measure_contraction: bool = True
    nodes: int = 10

    def __post_init__(self):
        if self.max_iter < 1 or self.nodes < 2:
            raise ValueError("Picard needs max_iter >= 1 and at least two time nodes")
        if not self.tol > 0:
            raise ValueError("Picard tolerance must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a point-vortex run.

    The marcher starts at t1 from alpha K(., z, t1) and takes nsteps uniform
    steps to T. ``linear`` drops the flux, leaving the Stokes flow of alpha delta_z.
    """
    alpha: float
    T: float
    nsteps: int
    z: tuple = (0.0, 1.0)
    r0: float = 0.9
    t1: float = 1e-3
    grid: GridSpec = field(default_factory=fields.half_plane_grid)
    xi_grid: GridSpec = field(default_factory=selfsimilar_grid)
    picard: PicardConfig = field(default_factory=PicardConfig)
    linear: bool = False
    record_every: int = 0
    cfl: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.nsteps < 1:
            raise ValueError("nsteps must be a positive integer")
        if not 0 < self.r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        if not 0 < self.t1 < self.T:
            raise ValueError("need 0 < t1 < T")
        if not self.z[1] > 0:
            raise ValueError("the vortex must start inside the half-plane")
        if self.z[1] - self.r0 <= 0:
            raise ValueError("the cut-off ball must stay off the wall")
        if self.grid.kind != HALF or self.xi_grid.kind != WHOLE:
            raise ValueError("grid must be a half-plane grid and xi_grid a whole-plane grid")
        if not self.cfl > 0:
            raise ValueError("cfl must be positive")


# ---------------------------------------------------------------- cut-off

def _phi(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def cutoff_profile(r):
    """zeta(r) = phi(1 - r)/(phi(1 - r) + phi(r - 1/2)), equal to 1 for r <= 1/2 and 0 for r >= 1."""
    a = _phi(1.0 - np.asarray(r, dtype=float))
    b = _phi(np.asarray(r, dtype=float) - 0.5)
    return a / (a + b)


def cutoff_values(x1, x2, z, r0):
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    return cutoff_profile(np.hypot(x1 - z[0], x2 - z[1]) / r0)


def build_cutoff(cfg, grid=None):
    """chi(x) = zeta(|x - z|/r0) on the half-plane grid (or on ``grid``)."""
    grid = grid or cfg.grid
    X1, X2 = grid.mesh()
    return ScalarField(grid, cutoff_values(X1, X2, cfg.z, cfg.r0))


# ---------------------------------------------------------------- flux

def _oseen_parts(X1, X2, alpha, z, t):
    """alpha G_t(x - z), alpha G_t(x - z*) and their velocities on arbitrary points."""
    rt = math.sqrt(t)
    a1, a2 = (X1 - z[0]) / rt, (X2 - z[1]) / rt
    b1, b2 = a1, (X2 + z[1]) / rt
    wbar = alpha / t * gaussian_G(a1, a2)
    wimg = alpha / t * gaussian_G(b1, b2)
    v1, v2 = oseen_velocity_profile(a1, a2)
    i1, i2 = oseen_velocity_profile(b1, b2)
    c = alpha / rt
    return wbar, wimg, (c * v1, c * v2), (c * i1, c * i2)


@dataclass(frozen=True)
class FlowLevel:
    t: float
    omega: ScalarField
    u: VectorField
    F: VectorField
    u_rest: VectorField


def flow_level(grid, alpha, z, t, q, linear=False):
    """Vorticity, velocity and flux F = u omega - u1bar omega1bar at one time level.

    ``q`` = omega - alpha G_t(x - z) + alpha G_t(x - z*) is the part of the
    vorticity without the Oseen core; near the wall it is smooth. The velocity is
    u1bar - (alpha/sqrt(t)) v^G((x - z*)/sqrt(t)) + BS_+[q], which is the
    half-plane Biot-Savart law applied to omega.
    """
    X1, X2 = grid.mesh()
    wbar, wimg, (ub1, ub2), (ui1, ui2) = _oseen_parts(X1, X2, alpha, z, t)
    ex = q - wimg
    om = wbar + ex
    w = bs_halfplane(ScalarField(grid, q))
    r1, r2 = w.u1 - ui1, w.u2 - ui2
    if linear:
        F1 = F2 = np.zeros(grid.shape)
    else:
        F1 = ub1 * ex + r1 * om
        F2 = ub2 * ex + r2 * om
    return FlowLevel(t, ScalarField(grid, om), VectorField(grid, ub1 + r1, ub2 + r2),
                     VectorField(grid, F1, F2), VectorField(grid, r1, r2))


# ---------------------------------------------------------------- trajectories

@dataclass(frozen=True)
class Snapshot:
    t: float
    omega: ScalarField
    u: VectorField
    state: object = None


@dataclass(frozen=True)
class SolutionTrajectory:
    snapshots: tuple
    diagnostics: tuple

    def __post_init__(self):
        for seq in (self.snapshots, self.diagnostics):
            ts = [s.t for s in seq]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("trajectory times must increase strictly")

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])

    def at(self, t):
        """Snapshot with recorded time closest to t."""
        return self.snapshots[int(np.argmin(np.abs(self.times - t)))]

    def write(self, outdir):
        os.makedirs(outdir, exist_ok=True)
        for i, s in enumerate(self.snapshots):
            fields.write_grid(os.path.join(outdir, f"omega_t{i}.grid"), s.omega)
            fields.write_grid(os.path.join(outdir, f"u1_t{i}.grid"), ScalarField(s.u.grid, s.u.u1))
            fields.write_grid(os.path.join(outdir, f"u2_t{i}.grid"), ScalarField(s.u.grid, s.u.u2))
        write_diagnostics_csv(os.path.join(outdir, "diagnostics.csv"), self.diagnostics)


def write_diagnostics_csv(path, records):
    with open(path, "w") as fh:
        fh.write(",".join(diagnostics.CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(f"{v:.17g}" for v in r.csv_row()) + "\n")


def _check_cfl(umax, dt, h, cfg, span):
    if umax * dt / h > cfg.cfl:
        need = int(math.ceil(span * umax / (cfg.cfl * h) * 1.05))
        raise CFLError(f"step refused: |u|max dt/h = {umax * dt / h:.3g} exceeds {cfg.cfl}; "
                       f"use nsteps >= {need}", need)


def march_mild(cfg, callback=None):
    """Integrate the mild formulation from t1 to T with an exponential midpoint rule.

    Per step (d = omega - alpha S(t) delta_z):
        d_mid = S(dt/2) d - (dt/2) S(dt/2) div F(t)
        d_new = S(dt) d - dt S(dt/2) div F(t + dt/2)
    where the midpoint flux is built from d_mid. The singular kernel of S(s) div
    is applied exactly, so only the slowly varying flux is sampled in time.
    """
    g, a, z = cfg.grid, cfg.alpha, cfg.z
    dt = (cfg.T - cfg.t1) / cfg.nsteps
    times = cfg.t1 + dt * np.arange(cfg.nsteps + 1)
    times[-1] = cfg.T
    chi = build_cutoff(cfg)
    op, oph = stokes_operator(g, dt), stokes_operator(g, 0.5 * dt)
    hmin = min(g.h1, g.h2)
    every = cfg.record_every or max(1, cfg.nsteps // 20)
    d = np.zeros(g.shape)
    snaps, diags = [], []
    for n, t in enumerate(times):
        lev = flow_level(g, a, z, t, d - a * point_vortex_K0(g, z, t), cfg.linear)
        rec = diagnostics.record(lev.omega, lev.u, t, chi, a, z=z)
        diags.append(rec)
        if n % every == 0 or n == cfg.nsteps:
            snaps.append(Snapshot(t, lev.omega, lev.u))
        if callback is not None:
            callback(n, rec, lev)
        if n == cfg.nsteps:
            break
        _check_cfl(rec.Uinf, dt, hmin, cfg, cfg.T - cfg.t1)
        if cfg.linear:
            continue
        dm = oph.S(d) - 0.5 * dt * oph.S_div(lev.F.u1, lev.F.u2)
        tm = t + 0.5 * dt
        mid = flow_level(g, a, z, tm, dm - a * point_vortex_K0(g, z, tm))
        d = op.S(d) - dt * oph.S_div(mid.F.u1, mid.F.u2)
    return SolutionTrajectory(tuple(snaps), tuple(diags))


# ---------------------------------------------------------------- decomposed system

@dataclass(frozen=True)
class DecomposedState:
    """omega = omega1bar + omega1hat + omega2 at time t.

    omega1bar = alpha G_t(x - z) is analytic; omega1hat is stored in
    self-similar form w(xi) = t omega1hat(z + sqrt(t) xi) on a whole-plane xi
    grid; omega2 is a half-plane field.
    """
    t: float
    alpha: float
    z: tuple
    w_hat1: ScalarField
    omega2: ScalarField

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")

    def omega_bar1(self, grid):
        X1, X2 = grid.mesh()
        return ScalarField(grid, _oseen_parts(X1, X2, self.alpha, self.z, self.t)[0])

    def omega_hat1(self, grid):
        X1, X2 = grid.mesh()
        rt = math.sqrt(self.t)
        return ScalarField(grid, fields.sample(self.w_hat1, (X1 - self.z[0]) / rt,
                                               (X2 - self.z[1]) / rt) / self.t)

    def reconstruct(self):
        g = self.omega2.grid
        return self.omega_bar1(g) + self.omega_hat1(g) + self.omega2


@dataclass(frozen=True)
class Forcings:
    """Nonlinear terms at one time level.

    F1 and F2 are whole-plane fields given in self-similar scaling,
    F~(xi) = t^(3/2) F(z + sqrt(t) xi), on the xi grid; F3 and F4 are
    half-plane fields. ``F3_xi`` is F3 in the same self-similar scaling.
    """
    F1: VectorField
    F2: VectorField
    F3: VectorField
    F4: VectorField
    F3_xi: VectorField
    level: FlowLevel


def nonlinear_terms(state, chi, cfg):
    """Assemble F1..F4 for a decomposed state.

    With u = u1bar + v1bar + u1hat + v1hat + u2:
      F1 = (1 - chi)(u1bar omega1hat + u1hat omega1bar)
      F2 = chi(u omega - u1bar omega1bar - u1bar omega1hat - u1hat omega1bar)
      F3 = chi(u omega - u1bar omega1bar),  F4 = (1 - chi)(u omega - u1bar omega1bar).
    The mirror corrections v1bar + v1hat and u2 are never formed separately:
    u - u1bar comes from the half-plane law applied to the non-Oseen part.
    """
    g, xg = cfg.grid, state.w_hat1.grid
    t, a, z = state.t, state.alpha, state.z
    rt = math.sqrt(t)
    W = state.w_hat1.values
    # half-plane level: q = omega1hat + omega2 + alpha G_t(x - z*)
    X1, X2 = g.mesh()
    wimg = _oseen_parts(X1, X2, a, z, t)[1]
    q = state.omega_hat1(g).values + state.omega2.values + wimg
    lev = flow_level(g, a, z, t, q)
    F3 = VectorField(g, chi.values * lev.F.u1, chi.values * lev.F.u2)
    F4 = lev.F - F3
    # xi grid: the core and omega1hat are native, half-plane fields are sampled
    Q1, Q2 = xg.mesh()
    P1, P2 = z[0] + rt * Q1, z[1] + rt * Q2
    chx = cutoff_values(P1, P2, z, cfg.r0)
    G = gaussian_G(Q1, Q2)
    vg1, vg2 = oseen_velocity_profile(Q1, Q2)
    uh = bs_plane(state.w_hat1)
    o2 = fields.sample(state.omega2, P1, P2)
    r1 = fields.sample(ScalarField(g, lev.u_rest.u1), P1, P2)
    r2 = fields.sample(ScalarField(g, lev.u_rest.u2), P1, P2)
    # everything below is scaled by t^(3/2)
    s = t ** 1.5
    ex = W / t + o2
    om = a * G / t + ex
    ub1, ub2 = a / rt * vg1, a / rt * vg2
    f3_1 = s * chx * (ub1 * ex + r1 * om)
    f3_2 = s * chx * (ub2 * ex + r2 * om)
    lin1 = a * (vg1 * W + uh.u1 * G)
    lin2 = a * (vg2 * W + uh.u2 * G)
    F1 = VectorField(xg, (1 - chx) * lin1, (1 - chx) * lin2)
    F2 = VectorField(xg, f3_1 - chx * lin1, f3_2 - chx * lin2)
    return Forcings(F1, F2, F3, F4, VectorField(xg, f3_1, f3_2), lev)


def _lp43(f):
    return fields.lp_norm(f, 4.0 / 3.0)


def star_distance(a, b):
    """max over nodes of t^(1/4) (||omega1hat_a - omega1hat_b|| + ||omega2_a - omega2_b||) in L^(4/3).

    For omega1hat the weighted norm equals the plain L^(4/3) norm of the
    self-similar profile, since ||w(./sqrt t)/t|| = t^(-1/4) ||w||.
    """
    out = 0.0
    for x, y in zip(a, b):
        d = _lp43(x.w_hat1 - y.w_hat1) + x.t ** 0.25 * _lp43(x.omega2 - y.omega2)
        out = max(out, d)
    return out


def _picard_map(states, cfg, chi):
    """One application of the fixed-point map on the time nodes.

    omega1hat(t) = int Sigma_alpha(t, s) div(F1 - F2) ds is marched in
    self-similar variables with the autonomous S_alpha; omega2 uses
        -int S2(t - s) div F3 - int S(t - s) div F4
            = -int S(t - s) div(F3 + F4) + [int heat(t - s) div F3] restricted,
    with the whole-plane heat integral marched in self-similar variables too.
    Each interval uses the midpoint rule in s on the exact propagators.
    """
    g, xg, a, z = cfg.grid, cfg.xi_grid, cfg.alpha, cfg.z
    dt = states[1].t - states[0].t
    op, oph = stokes_operator(g, dt), stokes_operator(g, 0.5 * dt)
    X1, X2 = g.mesh()
    W = np.zeros(xg.shape)
    B = np.zeros(xg.shape)
    A = np.zeros(g.shape)
    def k2(t):
        return a * stokes_point_vortex_parts(g, z, t)[1].values

    out = [DecomposedState(states[0].t, a, z, ScalarField(xg, W), ScalarField(g, k2(states[0].t)))]
    for s0, s1 in zip(states[:-1], states[1:]):
        tm = 0.5 * (s0.t + s1.t)
        mid = DecomposedState(tm, a, z, ScalarField(xg, 0.5 * (s0.w_hat1.values + s1.w_hat1.values)),
                              ScalarField(g, 0.5 * (s0.omega2.values + s1.omega2.values)))
        f = nonlinear_terms(mid, chi, cfg)
        tau, taum, c = math.log(s1.t / s0.t), math.log(s1.t / tm), dt / tm
        src = divergence(f.F1 - f.F2)
        nst = max(2, int(math.ceil(tau / 0.1)))
        W = (evolve_S_alpha(ScalarField(xg, W), a, tau, nst).values
             + c * evolve_S_alpha(src, a, taum, max(1, nst // 2)).values)
        B = (apply_S0_explicit(ScalarField(xg, B), tau).values
             + c * apply_S0_explicit(divergence(f.F3_xi), taum).values)
        F = f.F3 + f.F4
        A = op.S(A) + dt * oph.S_div(F.u1, F.u2)
        rt = math.sqrt(s1.t)
        heat = fields.sample(ScalarField(xg, B), (X1 - z[0]) / rt, (X2 - z[1]) / rt) / s1.t
        out.append(DecomposedState(s1.t, a, z, ScalarField(xg, W), ScalarField(g, k2(s1.t) - A + heat)))
    return out


def picard_decomposed(cfg, callback=None):
    """Picard iteration of the decomposed system on the nodes t_n = n T/N, n = 1..N.

    Starts from (omega1hat, omega2) = (0, 0). Returns (states at the nodes of
    the last iterate, report) where the report lists the weighted distances
    between successive iterates and their ratios.
    """
    pc = cfg.picard
    if cfg.T > 0.5 and abs(cfg.alpha) <= 5:
        warnings.warn("Picard iteration is only expected to contract for small T", RuntimeWarning)
    g, xg = cfg.grid, cfg.xi_grid
    times = cfg.T / pc.nodes * np.arange(1, pc.nodes + 1)
    chi = build_cutoff(cfg)
    states = [DecomposedState(t, cfg.alpha, cfg.z, ScalarField(xg, np.zeros(xg.shape)),
                              ScalarField(g, np.zeros(g.shape))) for t in times]
    diffs, ratios, grow, converged = [], [], 0, False
    for k in range(pc.max_iter):
        new = _picard_map(states, cfg, chi)
        d = star_distance(new, states)
        states = new
        if diffs and diffs[-1] > 0:
            r = d / diffs[-1]
            ratios.append(r)
            grow = grow + 1 if r >= 1 else 0
        diffs.append(d)
        if callback is not None:
            callback(k, d)
        if grow >= 3:
            raise PicardDivergence(f"Picard iteration diverges (ratios {ratios})", ratios)
        if d <= pc.tol * diffs[0]:
            converged = True
            break
    report = {"iterations": len(diffs), "distances": diffs, "ratios": ratios,
              "converged": converged, "times": times.tolist()}
    return states, report


# ---------------------------------------------------------------- finite-difference reference

class _FDPoisson:
    """Five-point Poisson solver with psi = 0 on the wall and the top, periodic in x1."""

    def __init__(self, grid):
        n1, n2, h1, h2 = grid.n1, grid.n2, grid.h1, grid.h2
        m = np.fft.fftfreq(n1) * n1
        p = np.arange(1, n2 - 1)
        l1 = -(4.0 / h1 ** 2) * np.sin(np.pi * m / n1) ** 2
        l2 = -(4.0 / h2 ** 2) * np.sin(np.pi * p / (2.0 * (n2 - 1))) ** 2
        self.lam = l1[:, None] + l2[None, :]

    def solve(self, omega):
        rhs = sfft.dst(sfft.fft(omega[:, 1:-1], axis=0), type=1, axis=1)
        inner = sfft.ifft(sfft.idst(rhs / self.lam, type=1, axis=1), axis=0).real
        psi = np.zeros_like(omega)
        psi[:, 1:-1] = inner
        return psi


def _upwind_x1(f, u, h):
    back = (3 * f - 4 * np.roll(f, 1, 0) + np.roll(f, 2, 0)) / (2 * h)
    fwd = (-3 * f + 4 * np.roll(f, -1, 0) - np.roll(f, -2, 0)) / (2 * h)
    return np.where(u > 0, back, fwd)


def _upwind_x2(f, u, h):
    out = np.zeros_like(f)
    back = np.zeros_like(f)
    fwd = np.zeros_like(f)
    back[:, 2:] = (3 * f[:, 2:] - 4 * f[:, 1:-1] + f[:, :-2]) / (2 * h)
    back[:, 1] = (f[:, 1] - f[:, 0]) / h
    fwd[:, :-2] = (-3 * f[:, :-2] + 4 * f[:, 1:-1] - f[:, 2:]) / (2 * h)
    fwd[:, -2] = (f[:, -1] - f[:, -2]) / h
    out[:, 1:-1] = np.where(u[:, 1:-1] > 0, back[:, 1:-1], fwd[:, 1:-1])
    return out


def reference_fd_solver(cfg, start, record_times=(), dt=None):
    """Vorticity-streamfunction finite differences with a Thom wall condition (oracle).

    ``start`` is a Snapshot (or ScalarField) holding omega at cfg.t1, normally
    the first state of march_mild. The streamfunction solves Laplacian psi =
    omega with psi = 0 on the wall and on the top of the box (periodic in x1);
    u = (-d2 psi, d1 psi). The wall vorticity is 2 psi(x1, h2)/h2^2, advection
    is second-order upwind and diffusion explicit, with Heun time stepping.
    cfg.linear switches advection off.
    """
    omega = start.omega if hasattr(start, "omega") else start
    g = omega.grid
    if g.kind != HALF:
        raise ValueError("the finite-difference solver works on half-plane grids")
    h1, h2 = g.h1, g.h2
    dt_diff = 0.8 / (2.0 * (1.0 / h1 ** 2 + 1.0 / h2 ** 2))
    if dt is None:
        dt = dt_diff
    elif dt > dt_diff:
        raise CFLError(f"explicit diffusion needs dt <= {dt_diff:.3g}", 0)
    pois = _FDPoisson(g)
    chi = build_cutoff(cfg, g)

    def velocity(w):
        psi = pois.solve(w)
        u1 = np.zeros_like(w)
        u1[:, 1:-1] = -(psi[:, 2:] - psi[:, :-2]) / (2 * h2)
        u2 = (np.roll(psi, -1, 0) - np.roll(psi, 1, 0)) / (2 * h1)
        return psi, u1, u2

    def wall(w, psi):
        w = w.copy()
        w[:, 0] = 2.0 * psi[:, 1] / h2 ** 2
        w[:, -1] = 0.0
        return w

    def rhs(w):
        psi, u1, u2 = velocity(w)
        lap = np.zeros_like(w)
        lap[:, 1:-1] = ((np.roll(w, -1, 0) - 2 * w + np.roll(w, 1, 0))[:, 1:-1] / h1 ** 2
                        + (w[:, 2:] - 2 * w[:, 1:-1] + w[:, :-2]) / h2 ** 2)
        if cfg.linear:
            return lap, u1, u2
        adv = u1 * _upwind_x1(w, u1, h1) + u2 * _upwind_x2(w, u2, h2)
        adv[:, [0, -1]] = 0.0
        return lap - adv, u1, u2

    def snap(t, w):
        _, u1, u2 = velocity(w)
        om = ScalarField(g, w.copy())
        u = VectorField(g, u1, u2)
        return Snapshot(t, om, u), diagnostics.record(om, u, t, chi, cfg.alpha, z=cfg.z)

    w = wall(omega.values.astype(float), pois.solve(omega.values))
    t = cfg.t1
    targets = sorted(set(float(x) for x in record_times) | {cfg.T})
    snaps, diags = [], []
    s, d = snap(t, w)
    snaps.append(s)
    diags.append(d)
    hmin = min(h1, h2)
    for target in targets:
        while t < target - 1e-14:
            step = min(dt, target - t)
            k1, u1, u2 = rhs(w)
            umax = float(np.max(np.hypot(u1, u2)))
            if umax * step / hmin > cfg.cfl:
                raise CFLError("finite-difference step violates the CFL bound", 0)
            w1 = w + step * k1
            w1 = wall(w1, pois.solve(w1))
            k2, _, _ = rhs(w1)
            w = w + 0.5 * step * (k1 + k2)
            w = wall(w, pois.solve(w))
            t += step
        s, d = snap(t, w)
        snaps.append(s)
        diags.append(d)
    return SolutionTrajectory(tuple(snaps), tuple(diags))
