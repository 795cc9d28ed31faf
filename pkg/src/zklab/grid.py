"""Periodic tensor grids and Fourier pseudo-spectral operators.

Fields are plain ``numpy`` arrays of shape ``grid.shape``; vector fields
stack their components along a leading axis. Transforms use the real FFT
over all axes with the normalization

    f_hat[k] = dV * sum_j f[j] exp(-i k.x_j),

so ``f_hat[0]`` is the mean of ``f`` times the box volume and the discrete
Parseval identity reads ``sum_j |f_j|^2 dV = (1/V) sum_k |f_hat_k|^2``.
Grid points sit at ``x_j = -L/2 + j*h`` on every axis.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from .errors import FieldFormatError, GridError

__all__ = [
    "Grid",
    "make_grid",
    "derivative",
    "sobolev_norm",
    "hs_eps_norm",
    "dealias",
    "random_smooth_field",
    "outer_shell_fraction",
    "save_field",
    "load_field",
]

DUMP_MAGIC = "ZKF1"


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class Grid:
    """Periodic box ``prod_j [-L_j/2, L_j/2)`` sampled with ``N_j`` points per axis."""

    def __init__(self, points, lengths):
        points = tuple(int(n) for n in points)
        lengths = tuple(float(L) for L in lengths)
        if len(points) not in (1, 2, 3):
            raise GridError(f"dim must be 1, 2 or 3, got {len(points)}")
        if len(lengths) != len(points):
            raise GridError("points and lengths must have the same length")
        for n in points:
            if not _is_power_of_two(n) or n < 8:
                raise GridError(f"point counts must be powers of two >= 8, got {n}")
        for L in lengths:
            if not (L > 0 and math.isfinite(L)):
                raise GridError(f"box lengths must be positive, got {L}")
        self.points = points
        self.lengths = lengths
        self.dim = len(points)
        self.shape = points
        self.spacing = tuple(L / n for L, n in zip(lengths, points))
        self.volume = float(np.prod(lengths))
        self.dV = float(np.prod(self.spacing))
        self.size = int(np.prod(points))

        # full (complex FFT) mode tables, Nyquist index -N/2
        self.mode_indices = tuple(np.fft.fftfreq(n, 1.0 / n).astype(int) for n in points)
        self.wavenumbers = tuple(
            2 * np.pi * m / L for m, L in zip(self.mode_indices, lengths)
        )

        # rfftn layout: last axis is halved
        self.spectral_shape = points[:-1] + (points[-1] // 2 + 1,)
        ks, kd, ms = [], [], []
        for ax, (n, L) in enumerate(zip(points, lengths)):
            if ax == self.dim - 1:
                m = np.arange(n // 2 + 1)
            else:
                m = np.fft.fftfreq(n, 1.0 / n).astype(int)
            k = 2 * np.pi * m / L
            k_deriv = np.where(np.abs(m) == n // 2, 0.0, k)
            bshape = [1] * self.dim
            bshape[ax] = -1
            ks.append(k.reshape(bshape))
            kd.append(k_deriv.reshape(bshape))
            ms.append(np.abs(m).reshape(bshape))
        self._k = ks
        self._kd = kd
        self.k2 = sum(k**2 for k in ks)
        self.kd2 = sum(k**2 for k in kd)

        keep = np.ones(self.spectral_shape, dtype=bool)
        for m, n in zip(ms, points):
            keep &= m <= n / 3.0
        self._dealias_mask = keep
        quarter = np.ones(self.spectral_shape, dtype=bool)
        for m, n in zip(ms, points):
            quarter &= m <= n / 4.0
        self._quarter_mask = quarter

        # multiplicity of each rfft coefficient in the full spectrum
        w = np.full(points[-1] // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self._weights = np.broadcast_to(
            w.reshape([1] * (self.dim - 1) + [-1]), self.spectral_shape
        )

    def __repr__(self):
        return f"Grid(points={self.points}, lengths={self.lengths})"

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.points == other.points
            and self.lengths == other.lengths
        )

    def __hash__(self):
        return hash((self.points, self.lengths))

    # --- coordinates -----------------------------------------------------
    def axis_coords(self, axis):
        n, L = self.points[axis], self.lengths[axis]
        return -L / 2 + np.arange(n) * (L / n)

    def coords(self):
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return np.meshgrid(*(self.axis_coords(a) for a in range(self.dim)), indexing="ij")

    def k(self, axis, deriv=True):
        """Wavenumbers along ``axis`` broadcastable to the spectral shape.

        With ``deriv=True`` the Nyquist entry is zeroed, as used by odd derivatives.
        """
        return self._kd[axis] if deriv else self._k[axis]

    # --- transforms ------------------------------------------------------
    def fft(self, f):
        return self.dV * sfft.rfftn(f)

    def ifft(self, fh):
        return sfft.irfftn(fh, s=self.shape) / self.dV

    def apply_symbol(self, f, symbol):
        return self.ifft(symbol * self.fft(f))

    # --- differential operators -------------------------------------------
    def derivative(self, f, axis, order=1):
        if not 0 <= axis < self.dim:
            raise GridError(f"axis {axis} out of range for a {self.dim}-d grid")
        k = self._kd[axis] if order % 2 else self._k[axis]
        return self.ifft((1j * k) ** order * self.fft(f))

    def gradient(self, f):
        fh = self.fft(f)
        return np.stack([self.ifft(1j * k * fh) for k in self._kd])

    def laplacian(self, f):
        return self.ifft(-self.k2 * self.fft(f))

    def dealias(self, f):
        return self.ifft(np.where(self._dealias_mask, self.fft(f), 0.0))

    def band_limit(self, f):
        """Keep only modes with ``|m_j| <= N_j/4`` on every axis."""
        return self.ifft(np.where(self._quarter_mask, self.fft(f), 0.0))

    def shift(self, f, distance, axis=0):
        """Return ``f(x - distance)`` along ``axis`` (exact spectral translation)."""
        return self.ifft(np.exp(-1j * self._kd[axis] * distance) * self.fft(f))

    # --- quadrature and norms ----------------------------------------------
    def integrate(self, f):
        return float(np.sum(f) * self.dV)

    def inner(self, f, g):
        return float(np.sum(f * g) * self.dV)

    def l2_norm(self, f):
        return math.sqrt(float(np.sum(np.square(f))) * self.dV)

    def spectral_energy(self, f, multiplier=1.0):
        """``(1/V) sum_k multiplier(k) |f_hat_k|^2`` over the full spectrum."""
        fh = self.fft(f)
        return float(np.sum(self._weights * multiplier * (fh.real**2 + fh.imag**2))) / self.volume

    def sobolev_norm(self, f, s=0.0):
        if s < 0:
            raise GridError("Sobolev index must be >= 0")
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            return math.sqrt(sum(self.sobolev_norm(c, s) ** 2 for c in f))
        if not np.all(np.isfinite(f)):
            raise GridError("field has non-finite values")
        mult = 1.0 if s == 0 else (1.0 + self.k2) ** s
        return math.sqrt(self.spectral_energy(f, mult))

    def hs_eps_norm(self, f, s, eps, weight=1.0):
        """Norm ``sqrt(|f|_{H^s}^2 + eps*weight*|grad f|_{H^s}^2)``.

        Vector fields (leading component axis) are summed componentwise.
        """
        if weight < 0 or eps * weight < 0:
            raise GridError("eps*weight must be non-negative")
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            return math.sqrt(sum(self.hs_eps_norm(c, s, eps, weight) ** 2 for c in f))
        if not np.all(np.isfinite(f)):
            raise GridError("field has non-finite values")
        mult = (1.0 + self.k2) ** s * (1.0 + eps * weight * self.kd2)
        return math.sqrt(self.spectral_energy(f, mult))


def make_grid(dim, points, lengths):
    """Build a :class:`Grid`, checking that ``dim`` matches the per-axis lists."""
    points = list(np.atleast_1d(points))
    lengths = list(np.atleast_1d(lengths))
    if dim not in (1, 2, 3):
        raise GridError(f"dim must be 1, 2 or 3, got {dim}")
    if len(points) == 1 and dim > 1:
        points = points * dim
    if len(lengths) == 1 and dim > 1:
        lengths = lengths * dim
    if len(points) != dim or len(lengths) != dim:
        raise GridError("points/lengths do not match dim")
    return Grid(points, lengths)


def derivative(grid, f, axis):
    return grid.derivative(f, axis)


def sobolev_norm(grid, f, s):
    return grid.sobolev_norm(f, s)


def hs_eps_norm(grid, f, s, eps, weight=1.0):
    return grid.hs_eps_norm(f, s, eps, weight)


def dealias(grid, f):
    return grid.dealias(f)


def random_smooth_field(grid, rng, amplitude=1.0, corr_length=1.0, zero_mean=False):
    """Gaussian random field with spectrum ``exp(-|k|^2 corr_length^2 / 2)``.

    The result is rescaled so that ``max|f| == amplitude``.
    """
    noise = rng.standard_normal(grid.shape)
    envelope = np.exp(-0.25 * grid.k2 * corr_length**2)
    fh = grid.fft(noise) * envelope
    fh = np.where(grid._dealias_mask, fh, 0.0)
    if zero_mean:
        fh.flat[0] = 0.0
    f = grid.ifft(fh)
    return amplitude * f / np.max(np.abs(f))


def outer_shell_fraction(grid, f, width=0.1):
    """``max|f|`` over the outer ``width`` fraction of the box relative to ``max|f|``.

    A point is in the shell when it lies within ``width*L_j/2`` of the
    boundary along some axis. Used to monitor contact with the periodic images.
    """
    f = np.abs(np.asarray(f, dtype=float))
    peak = float(f.max())
    if peak == 0:
        return 0.0
    shell = np.zeros(grid.shape, dtype=bool)
    for x, L in zip(grid.coords(), grid.lengths):
        shell |= np.abs(x) >= (1.0 - width) * L / 2
    return float(f[shell].max()) / peak


# --- field dumps -------------------------------------------------------------

def save_field(path, grid, f):
    """Write ``f`` as a ``ZKF1`` dump: one ASCII header line, then float64 LE samples."""
    f = np.asarray(f, dtype="<f8")
    if f.shape != grid.shape:
        raise FieldFormatError(f"field shape {f.shape} does not match grid {grid.shape}")
    header = " ".join(
        [DUMP_MAGIC, str(grid.dim)]
        + [str(n) for n in grid.points]
        + [repr(L) for L in grid.lengths]
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii") + b"\n")
        fh.write(np.ascontiguousarray(f).tobytes(order="C"))


def load_field(path):
    """Read a ``ZKF1`` dump, returning ``(grid, field)``."""
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise FieldFormatError("missing header line")
    tokens = data[:nl].decode("ascii", errors="replace").split()
    if not tokens or tokens[0] != DUMP_MAGIC:
        raise FieldFormatError("bad magic, expected ZKF1")
    try:
        dim = int(tokens[1])
        if dim not in (1, 2, 3) or len(tokens) != 2 + 2 * dim:
            raise ValueError
        points = [int(t) for t in tokens[2 : 2 + dim]]
        lengths = [float(t) for t in tokens[2 + dim :]]
    except (IndexError, ValueError):
        raise FieldFormatError(f"malformed header: {data[:nl]!r}") from None
    try:
        grid = Grid(points, lengths)
    except GridError as exc:
        raise FieldFormatError(str(exc)) from None
    payload = data[nl + 1 :]
    if len(payload) != 8 * grid.size:
        raise FieldFormatError(
            f"payload holds {len(payload)} bytes, header implies {8 * grid.size}"
        )
    f = np.frombuffer(payload, dtype="<f8").reshape(grid.shape).astype(float)
    return grid, f
