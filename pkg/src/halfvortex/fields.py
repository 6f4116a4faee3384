"""Grid data model, quadrature, extensions, FFT heat convolution and file formats.

Arrays are indexed ``values[i1, i2]`` with x1 along axis 0 and x2 along axis 1.
"""
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import fft as sfft
from scipy import ndimage, special

HALF = "HalfPlane"
WHOLE = "WholePlane"


class PaddingWarning(UserWarning):
    """Field mass reaches the box edge closer than the heat-kernel padding rule allows."""


class GridFormatError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    n1: int
    n2: int
    kind: str = HALF

    def __post_init__(self):
        if self.kind not in (HALF, WHOLE):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ValueError("grid box must have positive extent")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least two nodes per axis")
        if self.kind == HALF and self.x2_min != 0.0:
            raise ValueError("half-plane grids start at x2 = 0")

    @property
    def h1(self):
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    @property
    def h2(self):
        return (self.x2_max - self.x2_min) / (self.n2 - 1)

    @property
    def x1(self):
        return np.linspace(self.x1_min, self.x1_max, self.n1)

    @property
    def x2(self):
        return np.linspace(self.x2_min, self.x2_max, self.n2)

    @property
    def shape(self):
        return (self.n1, self.n2)

    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def nearest_index(self, x1, x2):
        i = int(round((x1 - self.x1_min) / self.h1))
        j = int(round((x2 - self.x2_min) / self.h2))
        return min(max(i, 0), self.n1 - 1), min(max(j, 0), self.n2 - 1)


def half_plane_grid(x1_min=-8.0, x1_max=8.0, x2_max=6.0, n1=512, n2=384):
    return GridSpec(x1_min, x1_max, 0.0, x2_max, n1, n2, HALF)


def whole_plane_grid(x1_min=-8.0, x1_max=8.0, x2_min=-5.0, x2_max=7.0, n1=512, n2=512):
    return GridSpec(x1_min, x1_max, x2_min, x2_max, n1, n2, WHOLE)


def mirror_grid(grid):
    """Whole-plane grid symmetric about x2 = 0 that contains a half-plane grid."""
    return GridSpec(grid.x1_min, grid.x1_max, -grid.x2_max, grid.x2_max,
                    grid.n1, 2 * grid.n2 - 1, WHOLE)


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other):
        return ScalarField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return ScalarField(self.grid, self.values - _vals(other))

    def __mul__(self, c):
        return ScalarField(self.grid, self.values * _vals(c))

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


def _vals(x):
    return x.values if isinstance(x, ScalarField) else x


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: GridSpec
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        for name in ("u1", "u2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != self.grid.shape:
                raise ValueError(f"{name} shape {v.shape} does not match grid {self.grid.shape}")
            if not np.all(np.isfinite(v)):
                raise ValueError("velocity values must be finite")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def __add__(self, other):
        return VectorField(self.grid, self.u1 + other.u1, self.u2 + other.u2)

    def __sub__(self, other):
        return VectorField(self.grid, self.u1 - other.u1, self.u2 - other.u2)

    def __mul__(self, c):
        c = _vals(c)
        return VectorField(self.grid, self.u1 * c, self.u2 * c)

    __rmul__ = __mul__

    def magnitude(self):
        return np.hypot(self.u1, self.u2)


# ---------------------------------------------------------------- quadrature

def trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


_GREGORY_END = np.array([251.0, 897.0, 633.0, 739.0]) / 720.0


def gregory_weights(n, h):
    """Trapezoid weights with fifth-order Gregory end corrections (n >= 8)."""
    if n < 8:
        return trapezoid_weights(n, h)
    w = np.ones(n)
    w[:4] = _GREGORY_END
    w[-4:] = _GREGORY_END[::-1]
    return w * h


def cell_weights(grid):
    """2D trapezoid weights on the grid box."""
    return np.outer(trapezoid_weights(grid.n1, grid.h1), trapezoid_weights(grid.n2, grid.h2))


def gregory_cell_weights(grid):
    """Trapezoid in x1 times Gregory in x2: high order for integrands smooth up to the wall."""
    return np.outer(trapezoid_weights(grid.n1, grid.h1), gregory_weights(grid.n2, grid.h2))


def integrate(f):
    """Trapezoid integral of a ScalarField (or of a raw array on its grid)."""
    return float(np.sum(cell_weights(f.grid) * f.values))


def lp_norm(f, p):
    """Trapezoid L^p norm over the grid box; p = inf gives max |f|."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    w = cell_weights(f.grid)
    if p == 1:
        return float(np.sum(w * a))
    return float(np.sum(w * a ** p) ** (1.0 / p))


def vector_lp_norm(u, p):
    """L^p norm of the Euclidean magnitude of a VectorField."""
    return lp_norm(ScalarField(u.grid, u.magnitude()), p)


def vertical_moment(f, m, shifted=False):
    """Integral of x2^m |f| (or (1 + x2)^m |f| when shifted) over a half-plane field."""
    if f.grid.kind != HALF:
        raise ValueError("vertical moments are defined for half-plane fields")
    x2 = f.grid.x2[None, :]
    weight = (1.0 + x2) ** m if shifted else x2 ** m
    return float(np.sum(cell_weights(f.grid) * weight * np.abs(f.values)))


# ---------------------------------------------------------------- extensions

def extend_odd(f):
    """Odd reflection across x2 = 0 onto the mirrored whole-plane grid."""
    _need_half(f)
    v = f.values
    lower = -v[:, :0:-1]
    mid = np.concatenate([lower, v[:, :1] * 0.0, v[:, 1:]], axis=1)
    return ScalarField(mirror_grid(f.grid), mid)


def extend_even(f):
    _need_half(f)
    v = f.values
    return ScalarField(mirror_grid(f.grid), np.concatenate([v[:, :0:-1], v], axis=1))


def extend_zero(f):
    _need_half(f)
    v = f.values
    return ScalarField(mirror_grid(f.grid),
                       np.concatenate([np.zeros_like(v[:, 1:]), v], axis=1))


def restrict_half(f):
    """Keep the rows x2 >= 0 of a whole-plane field whose grid has a node on x2 = 0."""
    g = f.grid
    if g.kind != WHOLE or g.x2_max <= 0 or g.x2_min >= 0:
        raise ValueError("restrict_half needs a whole-plane grid straddling x2 = 0")
    j0 = -g.x2_min / g.h2
    if abs(j0 - round(j0)) > 1e-9:
        raise ValueError("grid has no node on x2 = 0")
    j0 = int(round(j0))
    half = GridSpec(g.x1_min, g.x1_max, 0.0, g.x2_max, g.n1, g.n2 - j0, HALF)
    return ScalarField(half, f.values[:, j0:])


def restrict_half_vector(u):
    a = restrict_half(ScalarField(u.grid, u.u1))
    b = restrict_half(ScalarField(u.grid, u.u2))
    return VectorField(a.grid, a.values, b.values)


def _need_half(f):
    if f.grid.kind != HALF:
        raise ValueError("expected a half-plane field")


def sample(f, x1, x2):
    """Cubic-spline values of a field at arbitrary points; zero outside its box."""
    g = f.grid
    c1 = (np.asarray(x1) - g.x1_min) / g.h1
    c2 = (np.asarray(x2) - g.x2_min) / g.h2
    return ndimage.map_coordinates(f.values, [c1, c2], order=3, mode="constant", cval=0.0)


# ---------------------------------------------------------------- spectral helpers

def fft_len_x1(n1):
    """Periodic x1 length used by all x1-spectral operators: at least twice the box."""
    return sfft.next_fast_len(2 * n1, real=True)


def x1_wavenumbers(grid, n_fft=None):
    n_fft = n_fft or fft_len_x1(grid.n1)
    return 2.0 * np.pi * np.fft.rfftfreq(n_fft, grid.h1)


def x1_forward(values, n_fft):
    return sfft.rfft(values, n=n_fft, axis=0)


def x1_inverse(hat, n_fft, n1):
    return sfft.irfft(hat, n=n_fft, axis=0)[:n1]


def heat_padding(t, h):
    """Zero-padding (in nodes) that keeps periodic wrap-around below 1e-10."""
    return int(math.ceil(10.0 * math.sqrt(t) / h)) + 2


def gaussian_convolve(f, t, deriv=(0, 0)):
    """Convolution of a field with G_t via FFT on a zero-padded box.

    The multiplier exp(-t|k|^2) is applied exactly; ``deriv`` requests
    x-derivatives of the result (orders along x1 and x2).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    g = f.grid
    p1, p2 = heat_padding(t, g.h1), heat_padding(t, g.h2)
    _padding_check(f, t)
    N1 = sfft.next_fast_len(g.n1 + 2 * p1)
    N2 = sfft.next_fast_len(g.n2 + 2 * p2)
    spec = sfft.fft2(f.values, s=(N1, N2))
    k1 = 2 * np.pi * np.fft.fftfreq(N1, g.h1)[:, None]
    k2 = 2 * np.pi * np.fft.fftfreq(N2, g.h2)[None, :]
    spec *= np.exp(-t * (k1 ** 2 + k2 ** 2))
    if deriv[0]:
        spec *= (1j * k1) ** deriv[0]
    if deriv[1]:
        spec *= (1j * k2) ** deriv[1]
    out = sfft.ifft2(spec)[:g.n1, :g.n2].real
    return ScalarField(g, out)


def _padding_check(f, t):
    g = f.grid
    b1 = max(1, int(math.ceil(4 * math.sqrt(t) / g.h1)))
    b2 = max(1, int(math.ceil(4 * math.sqrt(t) / g.h2)))
    a = np.abs(f.values)
    peak = a.max()
    if peak == 0:
        return
    rim = max(a[:b1].max(), a[-b1:].max(), a[:, -b2:].max())
    if g.kind == WHOLE:
        rim = max(rim, a[:, :b2].max())
    if rim > 1e-10 * peak:
        warnings.warn(f"field reaches within 4*sqrt(t) of the box edge (rim/peak = {rim / peak:.1e})",
                      PaddingWarning, stacklevel=3)


# ---------------------------------------------------------------- exponential sweeps

def _exp_moments(lam, mmax=3):
    """e_m(lam) = int_0^1 exp(-lam s) s^m ds for m = 0..mmax, stable for all lam >= 0."""
    lam = np.asarray(lam, dtype=float)
    out = np.empty((mmax + 1,) + lam.shape)
    small = lam < 0.5
    if np.any(small):
        ls = lam[small]
        for m in range(mmax + 1):
            term = np.ones_like(ls)
            acc = term / (m + 1)
            for n in range(1, 30):
                term = term * (-ls) / n
                acc = acc + term / (m + n + 1)
            out[m][small] = acc
    big = ~small
    if np.any(big):
        lb = lam[big]
        em = np.exp(-lb)
        e = -np.expm1(-lb) / lb
        out[0][big] = e
        for m in range(1, mmax + 1):
            e = (m * e - em) / lb
            out[m][big] = e
    return out


def _lagrange_monomials(offsets):
    """Monomial coefficients C[w, m] of the Lagrange basis on the given nodes."""
    V = np.vander(np.asarray(offsets, dtype=float), increasing=True)
    return np.linalg.inv(V).T


class ExpSweeper:
    """Exponentially weighted running integrals along a uniform axis.

    For samples f_j = f(y0 + j h) and decay rates kappa >= 0 this returns
        up[j]   = int_{y_j}^{y_last} exp(-kappa (y - y_j)) f(y) dy
        down[j] = int_{y_0}^{y_j}    exp(-kappa (y_j - y)) f(y) dy
    using cubic interpolation of f in each cell, integrated exactly against
    the exponential.
    """

    def __init__(self, n, h, kappa):
        if n < 4:
            raise ValueError("exponential sweeps need at least 4 nodes")
        self.n, self.h = n, h
        self.kappa = np.asarray(kappa, dtype=float)
        lam = self.kappa * h
        e = _exp_moments(lam)
        d = np.empty_like(e)
        for m in range(4):
            d[m] = sum(math.comb(m, j) * (-1) ** j * e[j] for j in range(m + 1))
        self.decay = np.exp(-lam)
        self.w_up, self.w_dn = {}, {}
        for shift in (0, -1, -2):
            C = _lagrange_monomials(shift + np.arange(4))
            self.w_up[shift] = [h * np.tensordot(C[w], e, axes=1) for w in range(4)]
            self.w_dn[shift] = [h * np.tensordot(C[w], d, axes=1) for w in range(4)]

    def _stencil(self, p):
        q = min(max(p - 1, 0), self.n - 4)
        return q, q - p

    def sweeps(self, f):
        """f has shape (len(kappa), n); returns (up, down) with the same shape."""
        n = self.n
        up = np.zeros_like(f)
        down = np.zeros_like(f)
        for p in range(n - 2, -1, -1):
            q, s = self._stencil(p)
            w = self.w_up[s]
            cell = w[0] * f[:, q] + w[1] * f[:, q + 1] + w[2] * f[:, q + 2] + w[3] * f[:, q + 3]
            up[:, p] = self.decay * up[:, p + 1] + cell
        for p in range(n - 1):
            q, s = self._stencil(p)
            w = self.w_dn[s]
            cell = w[0] * f[:, q] + w[1] * f[:, q + 1] + w[2] * f[:, q + 2] + w[3] * f[:, q + 3]
            down[:, p + 1] = self.decay * down[:, p] + cell
        return up, down

    def up_total(self, f):
        """int_{y_0}^{y_last} exp(-kappa (y - y_0)) f(y) dy, one value per kappa."""
        return self.sweeps(f)[0][:, 0]


# ---------------------------------------------------------------- file formats

def write_grid(path, f):
    g = f.grid
    header = (f"HVGRID1 {g.n1} {g.n2} {g.x1_min!r} {g.x1_max!r} "
              f"{g.x2_min!r} {g.x2_max!r} {g.kind}\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values.T, dtype="<f8").tobytes())


def read_grid(path):
    with open(path, "rb") as fh:
        line = fh.readline()
        payload = fh.read()
    try:
        parts = line.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise GridFormatError(f"{path}: header is not ASCII") from exc
    if len(parts) != 8 or parts[0] != "HVGRID1":
        raise GridFormatError(f"{path}: bad header {line[:80]!r}")
    try:
        n1, n2 = int(parts[1]), int(parts[2])
        box = [float(v) for v in parts[3:7]]
        grid = GridSpec(box[0], box[1], box[2], box[3], n1, n2, parts[7])
    except ValueError as exc:
        raise GridFormatError(f"{path}: {exc}") from exc
    if len(payload) != 8 * n1 * n2:
        raise GridFormatError(f"{path}: expected {8 * n1 * n2} data bytes, found {len(payload)}")
    vals = np.frombuffer(payload, dtype="<f8").reshape(n2, n1).T.copy()
    try:
        return ScalarField(grid, vals)
    except ValueError as exc:
        raise GridFormatError(f"{path}: {exc}") from exc


def write_csv(path, f):
    X1, X2 = f.grid.mesh()
    data = np.column_stack([X1.T.ravel(), X2.T.ravel(), f.values.T.ravel()])
    np.savetxt(path, data, delimiter=",", header="x1,x2,value", comments="", fmt="%.17g")


# ---------------------------------------------------------------- half-line heat

def _gauss_moments(a, b, nmax):
    """E_n = int_a^b exp(-u^2) u^n du for n = 0..nmax, elementwise, without erf cancellation."""
    out = []
    ea, eb = np.exp(-a * a), np.exp(-b * b)
    pos, neg = a > 0, b < 0
    mid = ~(pos | neg)
    e0 = np.empty_like(a)
    e0[pos] = special.erfc(a[pos]) - special.erfc(b[pos])
    e0[neg] = special.erfc(-b[neg]) - special.erfc(-a[neg])
    e0[mid] = special.erf(b[mid]) - special.erf(a[mid])
    out.append(0.5 * math.sqrt(math.pi) * e0)
    out.append(0.5 * (ea - eb))
    for n in range(2, nmax + 1):
        out.append(0.5 * (n - 1) * out[n - 2] + 0.5 * (a ** (n - 1) * ea - b ** (n - 1) * eb))
    return out


class HalfLineHeat:
    """Product-integration matrices for one-dimensional heat flow on x2 >= 0.

    ``matrix(sign, deriv)`` returns M with (M f)_i approximating
        int_0^top [G_t(x_i - z) + sign G_t(x_i + z)] f(z) dz
    (or its x-derivative), where f is the cubic interpolant of the samples and
    G_t is the one-dimensional heat kernel. sign = -1 is the Dirichlet flow,
    +1 the Neumann flow and 0 the zero extension. The Gaussian is integrated
    exactly against the cubic, so no smoothness is assumed across the wall.
    """

    def __init__(self, n, h, t):
        if n < 4:
            raise ValueError("need at least 4 nodes")
        if t <= 0:
            raise ValueError("t must be positive")
        self.n, self.h, self.t = n, h, t
        self._cache = {}

    def _part(self, mirror, deriv):
        n, h, t = self.n, self.h, self.t
        x = h * np.arange(n)
        zp = h * np.arange(n - 1)
        c = -x if mirror else x
        rt = 2.0 * math.sqrt(t)
        ua = (zp[None, :] - c[:, None]) / rt
        ub = ua + h / rt
        E = _gauss_moments(ua, ub, 4)
        alpha = (c[:, None] - zp[None, :]) / h
        beta = rt / h
        # moments of sigma^m = ((z - z_p)/h)^m, sigma = alpha + beta u
        extra = 1 if deriv else 0
        mom = []
        for m in range(4):
            acc = np.zeros_like(ua)
            for j in range(m + 1):
                acc = acc + math.comb(m, j) * alpha ** (m - j) * beta ** j * E[j + extra]
            mom.append(acc / math.sqrt(math.pi))
        if deriv:
            scale = (-1.0 if mirror else 1.0) / math.sqrt(t)
            mom = [scale * mm for mm in mom]
        M = np.zeros((n, n))
        for p in range(n - 1):
            q = min(max(p - 1, 0), n - 4)
            C = _lagrange_monomials((q - p) + np.arange(4))
            for w in range(4):
                M[:, q + w] += sum(C[w, m] * mom[m][:, p] for m in range(4))
        return M

    def mirror(self, deriv=False):
        """Image part alone: int_0^top G_t(x_i + z) f(z) dz (or its x-derivative)."""
        key = ("mirror", deriv)
        if key not in self._cache:
            self._cache[key] = self._part(True, deriv)
        return self._cache[key]

    def matrix(self, sign, deriv=False):
        key = (sign, deriv)
        if key not in self._cache:
            M = self._part(False, deriv)
            if sign:
                M = M + sign * self.mirror(deriv)
            self._cache[key] = M
        return self._cache[key]
