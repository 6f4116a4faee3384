import math

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from halfvortex import biot_savart as B, diagnostics as D, fields, kernels, solver
from halfvortex.fields import ScalarField, VectorField

# [DERIVED] march_mild, alpha = 2, z = (0, 1), t1 = 0.005, 12 steps to T = 0.05 on
# half_plane_grid(-6, 6, 5, 192, 145); frozen regression value of Z(0.05)
Z_GOLDEN = (0.005039931808007093, 0.8527447804253756)


def _chi(grid, r0, z=(0.0, 1.0)):
    X1, X2 = grid.mesh()
    return ScalarField(grid, solver.cutoff_values(X1, X2, z, r0))


def test_vortex_center_of_a_gaussian():
    g = fields.half_plane_grid(-1, 1, 2, 401, 401)
    X1, X2 = g.mesh()
    for z in ((0.0, 1.0), (0.13, 0.9)):
        t = 1e-3
        om = ScalarField(g, 3.0 * np.exp(-((X1 - z[0]) ** 2 + (X2 - z[1]) ** 2) / (4 * t)) / (4 * np.pi * t))
        Z = D.vortex_center(om, _chi(g, 0.9, z), 3.0)
        assert np.max(np.abs(np.subtract(Z, z))) <= 1e-6
    with pytest.raises(ValueError):
        D.vortex_center(om, _chi(g, 0.9), 0.0)


def test_vortex_center_translation_covariance():
    rng = np.random.default_rng(2)
    # half-plane grids are pinned to the wall, so the shift is horizontal
    d = (0.25, 0.0)
    ga = fields.half_plane_grid(-2, 2, 3, 129, 97)
    gb = fields.half_plane_grid(-2 + d[0], 2 + d[0], 3, 129, 97)
    c = rng.uniform(-0.3, 0.3, 2)
    Xa, Ya = ga.mesh()
    f = np.exp(-((Xa - c[0]) ** 2 + (Ya - 1 - c[1]) ** 2) / 0.1) * (1 + Xa)
    # Z is not normalized by the mass, so a shift by d moves it by d only when int chi omega = alpha
    f *= 1.5 / np.sum(fields.cell_weights(ga) * _chi(ga, 0.7).values * f)
    za = D.vortex_center(ScalarField(ga, f), _chi(ga, 0.7), 1.5)
    zb = D.vortex_center(ScalarField(gb, f), _chi(gb, 0.7, (d[0], 1 + d[1])), 1.5)
    assert zb == pytest.approx((za[0] + d[0], za[1] + d[1]), abs=1e-12)


def test_vortex_center_regression():
    g = fields.half_plane_grid(-6, 6, 5, 192, 145)
    tr = solver.march_mild(solver.SolverConfig(alpha=2.0, T=0.05, nsteps=12, t1=0.005, grid=g))
    assert tr.diagnostics[-1].Z == pytest.approx(Z_GOLDEN, rel=1e-9)


def test_centre_does_not_depend_on_the_cutoff_radius():
    # the core leaves the inner ball like exp(-r0^2/(64 t)), so the two radii only agree at tiny t
    g = fields.half_plane_grid(-1, 1, 2, 801, 801)
    w = kernels.stokes_point_vortex(g, (0.0, 1.0), 2.5e-4)
    a, b = D.vortex_center(w, _chi(g, 0.3), 1.0), D.vortex_center(w, _chi(g, 0.6), 1.0)
    assert np.max(np.abs(np.subtract(a, b))) <= 1e-6


def test_centre_cutoff_invariance_up_to_t_005():
    g = fields.half_plane_grid(-1, 1, 2, 801, 801)
    w = kernels.stokes_point_vortex(g, (0.0, 1.0), 0.05)
    a, b = D.vortex_center(w, _chi(g, 0.3), 1.0), D.vortex_center(w, _chi(g, 0.6), 1.0)
    assert np.max(np.abs(np.subtract(a, b))) <= 1e-6


def test_drift_speed_stencil():
    t = np.array([0.0, 0.1, 0.25, 0.3, 0.5])
    Z = np.stack([1 + 2 * t - 3 * t ** 2, 0.5 * t ** 2], axis=1)
    for tq, i in ((0.1, 1), (0.25, 2), (0.3, 3)):
        v = D.drift_speed((t, Z), tq)
        assert v == pytest.approx((2 - 6 * t[i], t[i]), abs=1e-12)
    with pytest.raises(ValueError):
        D.drift_speed((t[:2], Z[:2]), 0.05)
    with pytest.raises(ValueError):
        D.drift_speed((t, Z), 0.9)


def test_drift_symmetries():
    g = fields.half_plane_grid(-6, 6, 5, 192, 145)
    v = {a: D.drift_speed(solver.march_mild(solver.SolverConfig(alpha=a, T=0.03, nsteps=10, t1=0.005, grid=g)), 0.02)
         for a in (4.0, -4.0)}
    assert v[-4.0][0] == pytest.approx(-v[4.0][0], rel=1e-10)
    assert v[-4.0][1] == pytest.approx(v[4.0][1], rel=1e-10)
    lin = solver.march_mild(solver.SolverConfig(alpha=4 * math.pi, T=0.03, nsteps=10, t1=0.005, grid=g, linear=True))
    assert abs(D.drift_speed(lin, 0.02)[0]) <= 1e-12


def _wbar_oracle(x1, x2):
    # the defining wall integral, evaluated with mpmath
    mpmath.mp.dps = 30
    x1, x2 = mpmath.mpf(x1), mpmath.mpf(x2)
    den = lambda y: ((x1 - y) ** 2 + x2 ** 2) * (1 + y ** 2)
    pts = [-mpmath.inf] + sorted({x1, mpmath.mpf(0)}) + [mpmath.inf]
    a = mpmath.quad(lambda y: x2 / den(y), pts)
    b = mpmath.quad(lambda y: (y - x1) / den(y), pts)
    c = 1 / (2 * mpmath.pi ** 2)
    return float(c * a), float(c * b)


def test_boundary_drift_closed_form():
    assert D.boundary_drift_Wbar(0.0, 1.0) == pytest.approx((1 / (4 * np.pi), 0.0), abs=1e-17)
    rng = np.random.default_rng(10)
    for x1, x2 in zip(rng.uniform(-3, 3, 10), rng.uniform(0.05, 3, 10)):
        w = D.boundary_drift_Wbar(x1, x2)
        ref = _wbar_oracle(x1, x2)
        assert w[0] == pytest.approx(ref[0], rel=1e-8)
        assert w[1] == pytest.approx(ref[1], rel=1e-8, abs=1e-15)
        assert D.boundary_drift_quadrature(x1, x2) == pytest.approx(ref, rel=1e-8)
    r = np.array([1e2, 1e3, 1e4])
    mag = np.hypot(*D.boundary_drift_Wbar(r / np.sqrt(2), r / np.sqrt(2)))
    assert r[-1] * mag[-1] == pytest.approx(1 / (2 * np.pi), rel=1e-3)


def test_localized_mass_basics():
    g = fields.half_plane_grid(-2, 2, 3, 128, 97)
    X1, X2 = g.mesh()
    inside = ScalarField(g, np.where(np.hypot(X1, X2 - 1) < 0.2, 1.0, 0.0))
    assert D.localized_mass(inside, 0.5) == 0.0
    with pytest.raises(ValueError):
        D.localized_mass(inside, 0.0)
    gd = fields.half_plane_grid()
    m = [D.localized_mass(kernels.stokes_point_vortex(gd, (0.0, 1.0), t), 0.5) for t in (0.04, 0.02, 0.01)]
    assert m[0] > m[1] > m[2]


def test_localized_mass_of_the_stokes_flow_at_t_001():
    g = fields.half_plane_grid()
    t = 0.01
    m = D.localized_mass(kernels.stokes_point_vortex(g, (0.0, 1.0), t), 0.5)
    # the Gaussian core alone has mass exp(-eps^2/(4t)) outside B(z, eps)
    assert m >= 0.9 * math.exp(-0.25 / (4 * t))
    assert m <= 1e-6


def test_decay_fit():
    t = np.geomspace(1, 10, 6)
    assert D.decay_fit(list(zip(t, 3 * t ** -2.0))) == pytest.approx(-2.0, abs=1e-13)
    with pytest.raises(ValueError):
        D.decay_fit(list(zip(t[:4], t[:4])))
    with pytest.raises(ValueError):
        D.decay_fit(list(zip(t, -t)))
    with pytest.raises(ValueError):
        D.decay_fit(list(zip(np.linspace(1, 2, 6), np.ones(6))))


def _bessel_energy(t, alpha=1.0):
    # ||v_d||^2 = (alpha^2/2 pi) int_0^inf exp(-2 t k^2) (1 - J0(2k))/k dk, the dipole in Fourier variables
    f = lambda k: math.exp(-2 * t * k * k) * (1 - special.j0(2 * k)) / k
    cut = 20 / math.sqrt(t)
    val = integrate.quad(f, 0, cut, limit=4000, epsabs=0, epsrel=1e-12)[0]
    return alpha ** 2 / (2 * math.pi) * val


def test_dipole_energy_two_routes():
    for t in (1e-3, 1e-2, 0.3):
        assert D.dipole_energy(t, alpha=2.0) == pytest.approx(_bessel_energy(t, 2.0), rel=1e-5)


def test_energy_small_time_asymptotics():
    rep = D.energy_asymptotics([1e-3, 1e-4])
    for r in rep:
        assert r["ratio"] == pytest.approx(1.0, abs=0.1)
    g = fields.half_plane_grid(-1, 1, 1, 8, 5)
    assert D.energy(VectorField(g, np.zeros(g.shape), np.zeros(g.shape))) == 0.0


def test_energy_large_time_decay():
    series = []
    for t in np.geomspace(10, 100, 5):
        s = 16.0 * math.sqrt(t)
        g = fields.half_plane_grid(-s, s, 0.5 * s, 512, 257)
        series.append((t, D.energy(B.bs_halfplane(kernels.stokes_point_vortex(g, (0.0, 1.0), t)))))
    assert D.decay_fit(series) == pytest.approx(-1.0, abs=0.1)


def test_groenwall_constant():
    assert D.groenwall_constant(3.0, 0.0) == 3.0
    assert D.groenwall_constant(0.0, 2.5) == pytest.approx(6.25, rel=1e-15)
    c = 1.0
    for _ in range(200):   # fixed-point iteration oracle
        c = 2 + 2 * math.sqrt(c)
    assert D.groenwall_constant(2.0, 2.0) == pytest.approx(c, rel=1e-14)
    assert c == pytest.approx(4 + 2 * math.sqrt(3), rel=1e-14)
    rng = np.random.default_rng(12)
    for a, b in rng.uniform(0, 10, (20, 2)):
        c = D.groenwall_constant(a, b)
        assert abs(c - a - b * math.sqrt(c)) <= 1e-12 * max(1.0, c)
    with pytest.raises(ValueError):
        D.groenwall_constant(0.0, 0.0)
    with pytest.raises(ValueError):
        D.groenwall_constant(-1.0, 1.0)


def test_record_and_csv_row():
    g = fields.half_plane_grid(-2, 2, 3, 64, 49)
    X1, X2 = g.mesh()
    om = ScalarField(g, np.exp(-(X1 ** 2 + (X2 - 1) ** 2) / 0.1))
    u = B.bs_halfplane(om)
    rec = D.record(om, u, 0.1, _chi(g, 0.9), 1.0)
    row = rec.csv_row()
    assert len(row) == len(D.CSV_COLUMNS) and row[0] == 0.1
    assert rec.norms[1.0] == pytest.approx(fields.lp_norm(om, 1))
    with pytest.raises(ValueError):
        D.DiagnosticsRecord(0.0, (0, 0), {1.0: 1.0}, 0.0, 0.0, {})
