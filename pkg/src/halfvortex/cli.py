"""Command-line front end.

    halfvortex COMMAND [--config PATH] [--out DIR] [--suite NAME] [--seed N]

Configuration files hold ``key = value`` lines, optionally grouped in
``[section]`` blocks; ``grid.n1 = 256`` and ``n1 = 256`` under ``[grid]`` are
equivalent. Exit codes: 0 success, 1 failed validation, 2 step refused by the
CFL guard, 3 configuration or input error.
"""
import argparse
import json
import math
import os
import sys

import numpy as np

from . import diagnostics, fields, kernels, solver
from .biot_savart import bs_halfplane

EXIT_OK, EXIT_FAIL, EXIT_CFL, EXIT_CONFIG = 0, 1, 2, 3
OUT_ENV = "HALFVORTEX_OUT"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- configuration

class Config:
    """Parsed key = value file; remembers the line of every entry for messages."""

    def __init__(self, entries=None, path="<config>"):
        self.entries = entries or {}
        self.path = path
        self.used = {}

    @classmethod
    def parse(cls, text, path="<config>"):
        entries, section = {}, ""
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if not section:
                    raise ConfigError(f"{path}:{n}: empty section name")
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{n}: missing key")
            full = f"{section}.{key}" if section else key
            if full in entries:
                raise ConfigError(f"{path}:{n}: duplicate key {full!r}")
            entries[full] = (value, n)
        return cls(entries, path)

    @classmethod
    def load(cls, path):
        if path is None:
            return cls()
        try:
            with open(path) as fh:
                return cls.parse(fh.read(), path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def _where(self, key):
        return f"{self.path}:{self.entries[key][1]}" if key in self.entries else self.path

    def get(self, key, conv=float, default=None, required=False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"{self.path}: missing required key {key!r}")
            self.used[key] = default
            return default
        text = self.entries[key][0]
        try:
            value = conv(text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self._where(key)}: bad value for {key!r}: {exc}") from exc
        self.used[key] = value
        return value

    def section(self, name):
        pre = name + "."
        return {k[len(pre):]: v for k, v in self.entries.items() if k.startswith(pre)}

    def resolved(self):
        lines = []
        for k in sorted(self.used):
            v = self.used[k]
            if isinstance(v, (tuple, list)):
                v = ", ".join(repr(float(x)) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _point(text):
    p = _floats(text)
    if len(p) != 2:
        raise ValueError("expected two numbers")
    return p


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _grid(cfg):
    d = fields.half_plane_grid()
    try:
        return fields.half_plane_grid(
            cfg.get("grid.x1_min", float, d.x1_min), cfg.get("grid.x1_max", float, d.x1_max),
            cfg.get("grid.x2_max", float, d.x2_max), cfg.get("grid.n1", int, d.n1),
            cfg.get("grid.n2", int, d.n2))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{cfg.path}: invalid grid: {exc}") from exc


def solver_config(cfg):
    """SolverConfig from a parsed file; every effective value is echoed in cfg.used."""
    grid = _grid(cfg)
    xi = cfg.get("xi.L", float, 12.0), cfg.get("xi.n", int, 128)
    pc = solver.PicardConfig()
    try:
        picard = solver.PicardConfig(cfg.get("picard.max_iter", int, pc.max_iter),
                                     cfg.get("picard.tol", float, pc.tol),
                                     cfg.get("picard.measure_contraction", _bool, True),
                                     cfg.get("picard.nodes", int, pc.nodes))
        from .oseen import selfsimilar_grid
        return solver.SolverConfig(
            alpha=cfg.get("alpha", float, required=True),
            T=cfg.get("T", float, required=True),
            nsteps=cfg.get("nsteps", int, required=True),
            z=cfg.get("z", _point, (0.0, 1.0)),
            r0=cfg.get("r0", float, 0.9),
            t1=cfg.get("t1", float, 1e-3),
            grid=grid, xi_grid=selfsimilar_grid(*xi), picard=picard,
            linear=cfg.get("linear", _bool, False),
            record_every=cfg.get("record_every", int, 0),
            cfl=cfg.get("cfl", float, 1.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: invalid solver configuration: {exc}") from exc


# ---------------------------------------------------------------- commands

def _fmt(v):
    return f"{v:.17g}"


def cmd_kernel_eval(cfg, out):
    """CSV of K, K0, K2 at the points of the [points] section (name = x1 x2 y1 y2 [t])."""
    t_default = cfg.get("t", float, None)
    rows = []
    for name, (text, line) in cfg.section("points").items():
        where = f"{cfg.path}:{line}: points.{name}"
        try:
            vals = _floats(text)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        if len(vals) == 4 and t_default is not None:
            vals = vals + (t_default,)
        if len(vals) != 5:
            raise ConfigError(f"{where}: expected x1 x2 y1 y2 t")
        x1, x2, y1, y2, t = vals
        if not t > 0:
            raise ConfigError(f"{where}: t must be positive (got {t})")
        if x2 < 0 or y2 < 0:
            raise ConfigError(f"{where}: points must satisfy x2, y2 >= 0")
        rows.append(vals)
    path = os.path.join(out, "kernels.csv")
    with open(path, "w") as fh:
        fh.write("x1,x2,y1,y2,t,K,K0,K2\n")
        for x1, x2, y1, y2, t in rows:
            k0 = float(kernels.kernel_K0(x1, x2, y1, y2, t))
            k = float(kernels.kernel_K(x1, x2, y1, y2, t))
            k2 = float(kernels.kernel_K2(x1, x2, y1, y2, t))
            fh.write(",".join(_fmt(v) for v in (x1, x2, y1, y2, t, k, k0, k2)) + "\n")
    return EXIT_OK


def cmd_stokes_evolve(cfg, out):
    """alpha S(t) delta_z and its velocity at the listed times."""
    grid = _grid(cfg)
    alpha = cfg.get("alpha", float, 1.0)
    z = cfg.get("z", _point, (0.0, 1.0))
    times = cfg.get("times", _floats, (0.01, 0.1))
    r0 = cfg.get("r0", float, 0.9)
    if any(t <= 0 for t in times) or list(times) != sorted(set(times)):
        raise ConfigError(f"{cfg.path}: times must be positive and increasing")
    chi = fields.ScalarField(grid, solver.cutoff_values(*grid.mesh(), z, r0))
    snaps, recs = [], []
    for t in times:
        om = kernels.stokes_point_vortex(grid, z, t) * alpha
        u = bs_halfplane(om)
        snaps.append(solver.Snapshot(t, om, u))
        recs.append(diagnostics.record(om, u, t, chi, alpha, z=z))
    solver.SolutionTrajectory(tuple(snaps), tuple(recs)).write(out)
    return EXIT_OK


def cmd_simulate(cfg, out):
    sc = solver_config(cfg)
    traj = solver.march_mild(sc)
    traj.write(out)
    return EXIT_OK


def cmd_picard(cfg, out):
    sc = solver_config(cfg)
    states, report = solver.picard_decomposed(sc)
    for i, s in enumerate(states):
        fields.write_grid(os.path.join(out, f"omega_t{i}.grid"), s.reconstruct())
        fields.write_grid(os.path.join(out, f"omega2_t{i}.grid"), s.omega2)
    with open(os.path.join(out, "picard_report.json"), "w") as fh:
        json.dump({k: [float(x) for x in v] if isinstance(v, list) else v
                   for k, v in report.items()}, fh, indent=2)
    return EXIT_OK


def _read_csv(path):
    with open(path) as fh:
        head = fh.readline().strip().split(",")
        rows = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    return head, np.array(rows).reshape(len(rows), len(head))


def cmd_diagnose(cfg, out):
    """Report on a trajectory directory written by simulate or stokes-evolve."""
    src = cfg.get("input", str, required=True)
    path = os.path.join(src, "diagnostics.csv")
    try:
        head, data = _read_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if head != diagnostics.CSV_COLUMNS:
        raise ConfigError(f"{path}: unexpected columns {head}")
    col = {k: data[:, i] for i, k in enumerate(head)}
    report = {"records": int(data.shape[0]),
              "max_gamma_residual": float(np.max(col["gamma_residual"])) if data.size else None}
    td = cfg.get("drift_time", float, None)
    if td is not None:
        report["drift_speed"] = diagnostics.drift_speed(
            (col["t"], np.stack([col["Z1"], col["Z2"]], axis=1)), td)
    t = col["t"]
    if t.size >= 5 and t.max() >= 10 * t.min():
        report["L1_decay_exponent"] = diagnostics.decay_fit(list(zip(t, col["L1"])))
    eps = cfg.get("eps", float, 0.5)
    z = cfg.get("z", _point, (0.0, 1.0))
    masses = []
    i = 0
    while os.path.exists(os.path.join(src, f"omega_t{i}.grid")):
        try:
            om = fields.read_grid(os.path.join(src, f"omega_t{i}.grid"))
        except fields.GridFormatError as exc:
            raise ConfigError(f"parse error: {exc}") from exc
        masses.append(diagnostics.localized_mass(om, eps, z))
        i += 1
    report["localized_mass"] = masses
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2)
    return EXIT_OK


# ---------------------------------------------------------------- validation suites

def suite_kernel_bounds(rng):
    """K0 > 0 at random points, fitted constant of the Gaussian-Poisson bound, scaling law."""
    n = 10000
    x1, y1 = rng.uniform(-6, 6, n), rng.uniform(-6, 6, n)
    x2, y2 = rng.uniform(0, 6, n), rng.uniform(1e-3, 6, n)
    k = kernels.kernel_K0(x1, x2, y1, y2, 1.0)
    a = np.linspace(-4, 4, 20)
    b = np.linspace(0.0, 4.0, 20)
    c = np.linspace(0.05, 8.0, 20)
    X1, X2, Y1, Y2 = (v.ravel() for v in np.meshgrid(a, b, a, c, indexing="ij"))
    lat = kernels.kernel_K0(X1, X2, Y1, Y2, 1.0)
    bound = np.exp(-X2 ** 2 / 5) * Y2 / ((X1 - Y1) ** 2 + (Y2 + 1) ** 2)
    C = float(np.max(lat / bound))
    # the scaled fast path against the time-t integrand evaluated directly
    err = 0.0
    for t in (0.25, 1.0, 4.0):
        rt = math.sqrt(t)
        for i in range(40):
            lhs = t * kernels.kernel_K0_unscaled(rt * x1[i], rt * x2[i], rt * y1[i], rt * y2[i], t)
            err = max(err, abs(lhs - k[i]) / abs(k[i]))
    ok = bool(np.all(k > 0)) and C <= 10 and err <= 1e-9
    return ok, {"min_K0": float(k.min()), "C_fit": C, "scaling_rel_err": err}


def _smooth_fields(grid):
    X1, X2 = grid.mesh()
    bump = np.exp(-((X1 - 0.3) ** 2 + (X2 - 1.2) ** 2) / 0.18)
    return [bump,
            (X1 - 0.3) * bump * 3.0,
            X2 ** 2 * np.exp(-(X1 ** 2) / 0.5 - (X2 - 0.8) ** 2 / 0.1)]


def suite_ukai(rng, table=None):
    """Resolvent construction of S(t) against the kernel-based operator.

    ``table``, if given, collects (t, field_id, max_residual) rows.
    """
    from .ukai import ukai_stokes_apply
    grid = fields.half_plane_grid(-8, 8, 6, 256, 193)
    worst = 0.0
    for i, v in enumerate(_smooth_fields(grid)):
        om = fields.ScalarField(grid, v)
        for t in (0.05, 0.2):
            a = ukai_stokes_apply(om, t).values
            b = kernels.apply_S(om, t).values
            r = float(np.max(np.abs(a - b)))
            if table is not None:
                table.append((t, i, r))
            worst = max(worst, r)
    return worst <= 1e-5, {"max_discrepancy": worst}


def suite_biot_savart(rng):
    """Momentum identity, wall condition, and half-plane law versus whole-plane law of the zero extension."""
    from .biot_savart import bs_plane
    grid = fields.half_plane_grid(-64, 64, 4, 2048, 257)
    om = kernels.stokes_point_vortex(grid, (0.0, 1.0), 0.1)
    u = bs_halfplane(om)
    w = fields.gregory_cell_weights(grid) * om.values
    mom = max(abs(float(np.sum(w * u.u1))), abs(float(np.sum(w * u.u2))))
    scale = fields.vector_lp_norm(u, 2) * fields.lp_norm(om, 2)
    whole = fields.restrict_half_vector(bs_plane(fields.extend_zero(om), support=(0.0, np.inf)))
    X1, _ = grid.mesh()
    win = np.abs(X1) <= 8
    diff = float(max(np.max(np.abs(u.u1 - whole.u1)[win]), np.max(np.abs(u.u2 - whole.u2)[win])))
    wall = float(np.max(np.abs(u.u2[:, 0])))
    ok = mom <= 1e-5 * scale and diff <= 1e-5 and wall <= 1e-10
    return ok, {"momentum_ratio": mom / scale, "half_vs_whole": diff, "wall_u2": wall}


def suite_groenwall(rng):
    worst = 0.0
    for a, b in rng.uniform(0, 10, size=(100, 2)):
        c = diagnostics.groenwall_constant(a, b)
        worst = max(worst, abs(c - a - b * math.sqrt(c)))
    return worst <= 1e-12, {"fixed_point_residual": worst}


SUITES = {
    "kernel-bounds": suite_kernel_bounds,
    "ukai": suite_ukai,
    "biot-savart": suite_biot_savart,
    "groenwall": suite_groenwall,
}


def cmd_validate(cfg, out, suite=None, seed=0):
    names = [suite] if suite else list(SUITES)
    for n in names:
        if n not in SUITES:
            raise ConfigError(f"unknown suite {n!r}; choose from {', '.join(SUITES)}")
    rng = np.random.default_rng(seed)
    ok = True
    lines = []
    for n in names:
        if n == "ukai":
            table = []
            passed, residuals = suite_ukai(rng, table)
            with open(os.path.join(out, "ukai.csv"), "w") as fh:
                fh.write("t,field_id,max_residual\n")
                for t, i, r in table:
                    fh.write(f"{_fmt(t)},{i},{_fmt(r)}\n")
        else:
            passed, residuals = SUITES[n](rng)
        ok &= passed
        res = ", ".join(f"{k}={v:.3e}" for k, v in residuals.items())
        lines.append(f"{n}: {'PASS' if passed else 'FAIL'} ({res})")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    with open(os.path.join(out, "validate.txt"), "w") as fh:
        fh.write(text)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "kernel-eval": cmd_kernel_eval,
    "stokes-evolve": cmd_stokes_evolve,
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "validate": cmd_validate,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    ap = argparse.ArgumentParser(prog="halfvortex", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config")
    ap.add_argument("--out")
    ap.add_argument("--suite")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = args.out or os.environ.get(OUT_ENV) or "halfvortex-out"
    try:
        cfg = Config.load(args.config)
        os.makedirs(out, exist_ok=True)
        if args.command == "validate":
            code = cmd_validate(cfg, out, args.suite, args.seed)
        else:
            code = COMMANDS[args.command](cfg, out)
        cfg.used["seed"] = args.seed
        with open(os.path.join(out, "resolved-config.txt"), "w") as fh:
            fh.write(f"command = {args.command}\n" + cfg.resolved())
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.CFLError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CFL


if __name__ == "__main__":
    sys.exit(main())
