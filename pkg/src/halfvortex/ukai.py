"""Stokes semigroup through the nonlocal operator (d2 - |d1|)^-1.

S(t) = (d2 - |d1|) exp(t Delta_D) (d2 - |d1|)^-1 gives a construction of the
semigroup that never touches the kernel K0, so it cross-checks the kernels
module. Everything runs on x1-Fourier rows: |d1| is the multiplier |k|, the
inverse operator is an upward exponential sweep in x2.
"""
import numpy as np

from . import fields, kernels
from .fields import HALF, ScalarField


class PartialFourierField:
    """x1-Fourier rows of a half-plane field: values[k-mode, x2-row] on the padded periodic axis."""

    def __init__(self, grid, values, n_fft):
        self.grid, self.values, self.n_fft = grid, values, n_fft

    @classmethod
    def from_field(cls, f, n_fft=None):
        n_fft = n_fft or fields.fft_len_x1(f.grid.n1)
        return cls(f.grid, fields.x1_forward(f.values, n_fft), n_fft)

    @property
    def kappa(self):
        return fields.x1_wavenumbers(self.grid, self.n_fft)

    def to_field(self):
        return ScalarField(self.grid, fields.x1_inverse(self.values, self.n_fft, self.grid.n1))


def _need_half(f):
    if f.grid.kind != HALF:
        raise ValueError("expected a half-plane field")


def inv_d2_minus_absd1_hat(w):
    """v-hat(k, x2) = -int_{x2}^top exp(|k|(x2 - y2)) w-hat(k, y2) dy2 (the bounded solution)."""
    sw = fields.ExpSweeper(w.grid.n2, w.grid.h2, w.kappa)
    up, _ = sw.sweeps(w.values)
    return PartialFourierField(w.grid, -up, w.n_fft)


def inv_d2_minus_absd1(omega):
    """Solve (d2 - |d1|) v = omega with v bounded in x2; v(., 0) equals minus the trace of omega."""
    _need_half(omega)
    return inv_d2_minus_absd1_hat(PartialFourierField.from_field(omega)).to_field()


def ukai_stokes_apply(omega0, t):
    """S(t) omega0 = (d2 - |d1|) exp(t Delta_D) (d2 - |d1|)^-1 omega0.

    The Dirichlet heat flow of v is applied by the half-line product integration
    of the kernels module; d2 of the result uses the x-derivative of the same
    Gaussian kernels, so no numerical differentiation is involved.
    """
    _need_half(omega0)
    if t <= 0:
        raise ValueError("t must be positive")
    op = kernels.stokes_operator(omega0.grid, float(t))
    v = inv_d2_minus_absd1_hat(PartialFourierField.from_field(omega0, op.N1))
    heat = op.heat_hat(v.values, -1)
    d2heat = op.heat_hat(v.values, -1, dx2=True)
    return ScalarField(omega0.grid, op.inv(d2heat - op.kappa[:, None] * heat).real)


def commutator_S0(omega0, t):
    """S0(t) omega0 = [exp(t Delta_D), d2] v0 = 2 d2 int G_t(x - z*) v0(z) dz, v0 = (d2 - |d1|)^-1 omega0."""
    _need_half(omega0)
    if t <= 0:
        raise ValueError("t must be positive")
    op = kernels.stokes_operator(omega0.grid, float(t))
    v = inv_d2_minus_absd1_hat(PartialFourierField.from_field(omega0, op.N1))
    img = op.heat1 * (v.values @ op.line.mirror(deriv=True).T)
    return ScalarField(omega0.grid, op.inv(2.0 * img).real)


def commutator_S0_check(omega0, t):
    """Max-norm gap between S0(t) omega0 from the commutator and from the K0 kernel slices."""
    a = commutator_S0(omega0, t)
    b = kernels.apply_S0(omega0, t)
    return float(np.max(np.abs(a.values - b.values)))
