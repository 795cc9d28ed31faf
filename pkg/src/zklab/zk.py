"""Zakharov-Kuznetsov equation in the co-moving frame.

The solver works with the normalized form

    dn/dT + A n dn/dX + k_long d^3n/dX^3 + k_perp d/dX Lap_perp n = 0,

where ``X`` is the first grid axis and ``Lap_perp`` acts on the others.
With ``k_long == k_perp == 1`` and ``A == 1`` this is the textbook
equation ``u_t + u u_x + d_x Lap u = 0``. The linear part is integrated
exactly in Fourier space (Lawson / integrating-factor RK4) and the
quadratic term is dealiased with the 2/3 rule.

Conserved along the flow (and exactly by the semi-discrete system when
``n`` is kept inside the 2/3 band):

    mean(n),   M = int n^2,
    H = int [ k_long/2 (dn/dX)^2 + k_perp/2 |grad_perp n|^2 - A n^3/6 ].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation

__all__ = [
    "ZKCoefficients",
    "ZKState",
    "ZKTrajectory",
    "ZKIntegrator",
    "zk_coeffs",
    "printed_zk_coeffs",
    "zk_rhs",
    "zk_step",
    "zk_solve",
    "zk_evolve",
    "invariant_M",
    "invariant_H",
    "kdv_soliton",
]


@dataclass(frozen=True)
class ZKCoefficients:
    advect: float
    disp_long: float
    disp_perp: float
    c: float = 1.0

    def __post_init__(self):
        if not (self.disp_long > 0 and self.disp_perp > 0):
            raise ValueError("dispersion coefficients must be positive")

    @property
    def isotropic(self):
        return self.disp_long == self.disp_perp

    @property
    def kappa(self):
        """Single dispersion coefficient of an isotropic equation."""
        if not self.isotropic:
            raise ValueError("coefficients are anisotropic; use disp_long/disp_perp")
        return self.disp_long

    @classmethod
    def isotropic_form(cls, kappa, advect=1.0, c=1.0):
        return cls(advect=advect, disp_long=kappa, disp_perp=kappa, c=c)


def zk_coeffs(a, alpha=0.0):
    """Coefficients of the ZK equation that the leading density profile obeys.

    Obtained by eliminating the second-order profiles from the order-eps
    balance of the scaled Euler-Poisson system with wave speed
    ``c = sqrt(1 + alpha)``::

        2c dn/dT + 2(1+alpha) n dn/dX + d^3n/dX^3
            + (1 + (1+alpha)^2/a^2) d/dX Lap_perp n = 0.

    For ``alpha = 0`` this is the classical ion-acoustic ZK equation with
    ``k_long = 1/2`` and ``k_perp = (1 + 1/a^2)/2``.
    """
    if not a > 0:
        raise ValueError("a must be positive (the transverse balance divides by a)")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    c = math.sqrt(1.0 + alpha)
    return ZKCoefficients(
        advect=(1.0 + alpha) / c,
        disp_long=1.0 / (2.0 * c),
        disp_perp=(1.0 + (1.0 + alpha) ** 2 / a**2) / (2.0 * c),
        c=c,
    )


def printed_zk_coeffs(a, alpha=0.0):
    """Isotropic coefficients ``kappa = (1 + c/a^2)/(2c)``, unit advection.

    This is the literal normalization of ``2c n_T + 2c n n_X + (1 + c/a^2)
    Lap n_X = 0``. It is kept for reference: the profiles built by
    :mod:`zklab.profiles` are consistent with :func:`zk_coeffs`, not with
    this form (the residual study exposes the difference).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    c = math.sqrt(1.0 + alpha)
    return ZKCoefficients.isotropic_form((1.0 + c / a**2) / (2.0 * c), advect=1.0, c=c)


@dataclass
class ZKState:
    n1: np.ndarray
    T: float = 0.0


def _linear_symbol(grid, coeffs):
    kx = grid.k(0)
    kperp2 = sum(grid.k(ax) ** 2 for ax in range(1, grid.dim)) if grid.dim > 1 else 0.0
    return 1j * kx * (coeffs.disp_long * kx**2 + coeffs.disp_perp * kperp2)


def _nonlinear_hat(grid, nh, coeffs):
    n = grid.ifft(nh)
    sq = grid.fft(n * n)
    return np.where(grid._dealias_mask, -0.5j * coeffs.advect * grid.k(0) * sq, 0.0)


def zk_rhs(grid, n1, coeffs, nonlinear=True, dealiased=True):
    """``dn/dT`` in physical space.

    With ``dealiased=False`` the product ``n1**2`` keeps its full spectrum,
    which is exact when ``n1`` is limited to ``|m| <= N/4``.
    """
    nh = grid.fft(n1)
    out = _linear_symbol(grid, coeffs) * nh
    if nonlinear:
        if dealiased:
            out = out + _nonlinear_hat(grid, nh, coeffs)
        else:
            out = out - 0.5j * coeffs.advect * grid.k(0) * grid.fft(n1 * n1)
    return grid.ifft(out)


def cfl_limit(grid, n1, coeffs):
    peak = coeffs.advect * float(np.max(np.abs(n1)))
    return math.inf if peak == 0 else 0.5 * min(grid.spacing) / peak


class ZKIntegrator:
    """Integrating-factor RK4 stepper with cached exponentials for one ``dT``."""

    def __init__(self, grid, coeffs, dT, nonlinear=True):
        self.grid = grid
        self.coeffs = coeffs
        self.dT = float(dT)
        self.nonlinear = nonlinear
        L = _linear_symbol(grid, coeffs)
        self.E = np.exp(0.5 * self.dT * L)
        self.E2 = self.E * self.E

    def check_cfl(self, n1):
        if self.nonlinear and abs(self.dT) > cfl_limit(self.grid, n1, self.coeffs):
            raise CFLViolation(
                f"dT={self.dT:.3g} exceeds 0.5*h/max|n| = {cfl_limit(self.grid, n1, self.coeffs):.3g}"
            )

    def step_hat(self, vh):
        if not self.nonlinear:
            return self.E2 * vh
        g, c, h = self.grid, self.coeffs, self.dT
        E, E2 = self.E, self.E2
        k1 = _nonlinear_hat(g, vh, c)
        k2 = _nonlinear_hat(g, E * (vh + 0.5 * h * k1), c)
        k3 = _nonlinear_hat(g, E * vh + 0.5 * h * k2, c)
        k4 = _nonlinear_hat(g, E2 * vh + h * E * k3, c)
        return E2 * vh + (h / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)

    def step(self, state):
        self.check_cfl(state.n1)
        vh = self.grid.fft(state.n1)
        if self.nonlinear:
            vh = np.where(self.grid._dealias_mask, vh, 0.0)
        return ZKState(self.grid.ifft(self.step_hat(vh)), state.T + self.dT)


def zk_step(grid, state, dT, coeffs, nonlinear=True):
    return ZKIntegrator(grid, coeffs, dT, nonlinear).step(state)


def invariant_M(grid, n1):
    return grid.integrate(n1 * n1)


def invariant_H(grid, n1, coeffs):
    nh = grid.fft(n1)
    dx = grid.ifft(1j * grid.k(0) * nh)
    density = 0.5 * coeffs.disp_long * dx**2 - coeffs.advect * n1**3 / 6.0
    for ax in range(1, grid.dim):
        density = density + 0.5 * coeffs.disp_perp * grid.ifft(1j * grid.k(ax) * nh) ** 2
    return grid.integrate(density)


@dataclass
class ZKTrajectory:
    T: np.ndarray
    M: np.ndarray
    H: np.ndarray
    mean: np.ndarray
    final: ZKState
    snapshots: dict = field(default_factory=dict, repr=False)

    def rows(self):
        return list(zip(self.T.tolist(), self.M.tolist(), self.H.tolist(), self.mean.tolist()))


def zk_solve(grid, n0, coeffs, T_end, dT, nonlinear=True, snapshot_every=0):
    """Integrate from ``T = 0`` to ``T_end`` with a uniform step close to ``dT``.

    The step is shrunk so that an integer number of steps lands exactly on
    ``T_end``. Invariants are logged after every step.
    """
    if not T_end > 0:
        raise ValueError("T_end must be positive")
    nsteps = max(1, math.ceil(T_end / dT - 1e-12))
    integ = ZKIntegrator(grid, coeffs, T_end / nsteps, nonlinear)
    n0 = np.asarray(n0, dtype=float)
    if nonlinear:
        n0 = grid.dealias(n0)
    state = ZKState(n0, 0.0)
    log = [(0.0, invariant_M(grid, n0), invariant_H(grid, n0, coeffs), float(np.mean(n0)))]
    snaps = {0.0: n0} if snapshot_every else {}
    vh = grid.fft(n0)
    for i in range(1, nsteps + 1):
        integ.check_cfl(state.n1)
        vh = integ.step_hat(vh)
        state = ZKState(grid.ifft(vh), T_end * i / nsteps)
        log.append(
            (
                state.T,
                invariant_M(grid, state.n1),
                invariant_H(grid, state.n1, coeffs),
                float(np.mean(state.n1)),
            )
        )
        if snapshot_every and i % snapshot_every == 0:
            snaps[state.T] = state.n1
    T, M, H, mean = (np.array(col) for col in zip(*log))
    return ZKTrajectory(T=T, M=M, H=H, mean=mean, final=state, snapshots=snaps)


def zk_evolve(grid, state, coeffs, T_target, dT_max):
    """Advance ``state`` to slow time ``T_target`` in equal steps no larger than ``dT_max``."""
    span = T_target - state.T
    if span == 0:
        return state
    nsteps = max(1, math.ceil(abs(span) / dT_max - 1e-12))
    integ = ZKIntegrator(grid, coeffs, span / nsteps)
    vh = np.where(grid._dealias_mask, grid.fft(state.n1), 0.0)
    for _ in range(nsteps):
        integ.check_cfl(grid.ifft(vh))
        vh = integ.step_hat(vh)
    return ZKState(grid.ifft(vh), T_target)


def kdv_soliton(X, speed, coeffs, T=0.0, center=0.0):
    """Travelling wave ``(3 s/A) sech^2(sqrt(s/(4 k)) (X - X0 - s T))`` of the 1-d equation."""
    width = math.sqrt(speed / (4.0 * coeffs.disp_long))
    return 3.0 * speed / coeffs.advect / np.cosh(width * (X - center - speed * T)) ** 2
