"""Observables of a vorticity trajectory: vortex centre, drift, localization, decay and energy."""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import integrate as sint

from . import fields
from .fields import HALF
from .biot_savart import gaussian_velocity
from .kernels import stokes_point_vortex, trace_gamma

NORM_EXPONENTS = (1.0, 4.0 / 3.0, 2.0, math.inf)
MOMENT_ORDERS = (1, 2)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    Z: tuple
    norms: dict
    energy: float
    gamma_residual: float
    moments: dict
    localized_mass: dict = field(default_factory=dict)
    Uinf: float = 0.0

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("diagnostics need t > 0")
        if any(v < 0 for v in self.norms.values()):
            raise ValueError("norms must be non-negative")

    def csv_row(self):
        n = self.norms
        return [self.t, self.Z[0], self.Z[1], n[1.0], n[4.0 / 3.0], n[2.0], n[math.inf],
                self.Uinf, self.energy, self.gamma_residual,
                self.moments[1], self.moments[2]]


CSV_COLUMNS = ["t", "Z1", "Z2", "L1", "L43", "L2", "Linf", "Uinf", "energy",
               "gamma_residual", "moment1", "moment2"]


def vortex_center(omega, chi, alpha):
    """Z = (1/alpha) int chi x omega dx."""
    if alpha == 0:
        raise ValueError("the vortex centre is undefined for alpha = 0")
    X1, X2 = omega.grid.mesh()
    w = fields.cell_weights(omega.grid) * chi.values * omega.values
    return float(np.sum(w * X1)) / alpha, float(np.sum(w * X2)) / alpha


def drift_speed(traj, t):
    """Centered difference of Z at the recorded time nearest to t.

    ``traj`` is a SolutionTrajectory or a pair (times, Z) with Z of shape (n, 2).
    """
    if hasattr(traj, "diagnostics"):
        times = np.array([d.t for d in traj.diagnostics])
        Z = np.array([d.Z for d in traj.diagnostics], dtype=float)
    else:
        times, Z = np.asarray(traj[0], dtype=float), np.asarray(traj[1], dtype=float)
    if times.size < 3:
        raise ValueError("drift_speed needs at least three recorded times")
    i = int(np.argmin(np.abs(times - t)))
    i = min(max(i, 1), times.size - 2)
    if not times[i - 1] <= t <= times[i + 1]:
        raise ValueError(f"t = {t} is not bracketed by recorded times")
    dt = times[i + 1] - times[i - 1]
    a, b = times[i] - times[i - 1], times[i + 1] - times[i]
    # three-point derivative at times[i], exact for quadratics on uneven spacing
    d = (-b / (a * dt)) * Z[i - 1] + ((b - a) / (a * b)) * Z[i] + (a / (b * dt)) * Z[i + 1]
    return float(d[0]), float(d[1])


def boundary_drift_Wbar(x1, x2):
    """W(x) = (1/2 pi) (1 + x2, -x1)/(x1^2 + (1 + x2)^2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r2 = x1 * x1 + (1.0 + x2) ** 2
    return (1.0 + x2) / (2 * math.pi * r2), -x1 / (2 * math.pi * r2)


def boundary_drift_quadrature(x1, x2):
    """W(x) from its defining wall integral, by adaptive quadrature (oracle).

    W(x) = (1/2 pi^2) int (x2, y1 - x1)/((x1 - y1)^2 + x2^2) dy1/(1 + y1^2).
    """
    def comp(num):
        f = lambda y: num(y) / (((x1 - y) ** 2 + x2 * x2) * (1.0 + y * y))
        # split at the two peaks so quad sees each one
        pts = sorted({x1, 0.0})
        edges = [-np.inf] + pts + [np.inf]
        return sum(sint.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=400)[0]
                   for a, b in zip(edges[:-1], edges[1:]))
    c = 1.0 / (2 * math.pi ** 2)
    return c * comp(lambda y: x2 + 0.0 * y), c * comp(lambda y: y - x1)


def localized_mass(omega, eps, z=(0.0, 1.0)):
    """int |omega| over {|x - z| >= eps and x2 >= eps}."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    X1, X2 = omega.grid.mesh()
    mask = (np.hypot(X1 - z[0], X2 - z[1]) >= eps) & (X2 >= eps)
    return float(np.sum(fields.cell_weights(omega.grid) * np.abs(omega.values) * mask))


def decay_fit(series):
    """Least-squares slope of log(value) against log(t)."""
    t = np.array([s[0] for s in series], dtype=float)
    v = np.array([s[1] for s in series], dtype=float)
    if t.size < 5:
        raise ValueError("decay_fit needs at least five samples")
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("decay_fit needs positive times and values")
    if t.max() / t.min() < 10 * (1 - 1e-12):
        raise ValueError("samples must span at least a decade")
    slope, _ = np.polyfit(np.log(t), np.log(v), 1)
    return float(slope)


def energy(u):
    """Kinetic energy ||u||_2^2 on the grid box."""
    return fields.vector_lp_norm(u, 2) ** 2


def dipole_energy(t, alpha=1.0, z=(0.0, 1.0), R=1e3, panels=80, order=16):
    """||v_d(t)||_2^2 over the half-plane for v_d = alpha BS[G_t(. - z) - G_t(. - z*)].

    Gauss-Legendre in log r about z and in the polar angle over the arc that
    stays above the wall; the tail beyond radius R is O(z2^2/R^2).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    c, cs = np.asarray(z, dtype=float), np.array([z[0], -z[1]], dtype=float)
    st = math.sqrt(t)
    gx, gw = np.polynomial.legendre.leggauss(order)
    # radial nodes in s = log r, with a breakpoint where the circle meets the wall
    lo, hi, mid = math.log(1e-6 * st), math.log(R * max(1.0, st)), math.log(z[1])
    edges = np.unique(np.concatenate([np.linspace(lo, mid, panels // 2 + 1),
                                      np.linspace(mid, hi, panels // 2 + 1)]))
    a, b = edges[:-1, None], edges[1:, None]
    s = (0.5 * (b - a) * (gx + 1.0) + a).ravel()
    ws = (0.5 * (b - a) * gw).ravel()
    r = np.exp(s)
    # arc of the circle |x - z| = r inside x2 >= 0
    th0 = np.where(r > z[1], np.arcsin(np.minimum(1.0, z[1] / r)), 0.5 * math.pi)
    ta, tb = -th0[:, None], (math.pi + th0)[:, None]
    tg, tw = np.polynomial.legendre.leggauss(64)
    th = 0.5 * (tb - ta) * (tg + 1.0) + ta
    w_th = 0.5 * (tb - ta) * tw
    x1 = c[0] + r[:, None] * np.cos(th)
    x2 = c[1] + r[:, None] * np.sin(th)
    a1, a2 = gaussian_velocity(x1, x2, c, t)
    b1, b2 = gaussian_velocity(x1, x2, cs, t)
    e = (a1 - b1) ** 2 + (a2 - b2) ** 2
    return alpha * alpha * float(np.sum(ws * r * r * np.sum(w_th * e, axis=1)))


def energy_asymptotics(samples, alpha=1.0, z=(0.0, 1.0)):
    """Energy and its ratio to (alpha^2/4 pi) log(1/t).

    ``samples`` holds (t, VectorField) pairs, or bare times, in which case the
    energy of the Stokes dipole part is computed by quadrature.
    """
    out = []
    for item in samples:
        if isinstance(item, (int, float)):
            t, e = float(item), dipole_energy(float(item), alpha, z)
        else:
            t, u = item
            e = energy(u)
        ref = alpha ** 2 / (4 * math.pi) * math.log(1.0 / t)
        out.append({"t": t, "energy": e, "ratio": e / ref if ref > 0 else math.nan})
    return out


def stokes_norm_series(times, p, z=(0.0, 1.0), L=24.0, n=512):
    """(t, ||S(t) delta_z||_p) pairs from the kernel, each on a box scaled by sqrt(t)."""
    out = []
    for t in times:
        st = math.sqrt(t)
        g = fields.half_plane_grid(z[0] - L * st, z[0] + L * st, 0.5 * L * st, n, n // 2)
        out.append((float(t), fields.lp_norm(stokes_point_vortex(g, z, t), p)))
    return out


def groenwall_constant(a, b):
    """Positive root of c = a + b sqrt(c), i.e. c = ((b + sqrt(b^2 + 4a))/2)^2."""
    if a < 0 or b < 0:
        raise ValueError("a and b must be non-negative")
    if a == 0 and b == 0:
        raise ValueError("a = b = 0 has only the degenerate root c = 0")
    r = (b + math.sqrt(b * b + 4 * a)) / 2.0
    # r^2 = a + b r exactly; this form returns a itself when b = 0
    return a + b * r


def record(omega, u, t, chi=None, alpha=0.0, eps_list=(0.5,), z=(0.0, 1.0)):
    """Assemble a DiagnosticsRecord for one time level of a half-plane flow."""
    if omega.grid.kind != HALF:
        raise ValueError("diagnostics expect half-plane fields")
    if chi is not None and alpha != 0:
        Z = vortex_center(omega, chi, alpha)
    else:
        Z = (math.nan, math.nan)
    norms = {p: fields.lp_norm(omega, p) for p in NORM_EXPONENTS}
    gam = float(np.max(np.abs(trace_gamma(omega))))
    l1 = norms[1.0]
    return DiagnosticsRecord(
        t=t, Z=Z, norms=norms, energy=energy(u),
        gamma_residual=gam / l1 if l1 > 0 else 0.0,
        moments={m: fields.vertical_moment(omega, m, shifted=True) for m in MOMENT_ORDERS},
        localized_mass={e: localized_mass(omega, e, z) for e in eps_list},
        Uinf=float(np.max(u.magnitude())),
    )
