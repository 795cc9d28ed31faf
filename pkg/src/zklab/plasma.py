"""Scaled magnetized Euler-Poisson system.

Unknowns ``(n, v, phi)`` evolve by

    dn/dt + div((1 + eps n) v) = 0
    dv/dt + eps (v.grad) v + grad(phi) + alpha grad(n)/(1 + eps n)
          + a eps^{-1/2} e x v = 0,              e x v = (0, -v_z, v_y)
    -eps^2 Lap(phi) + exp(eps phi) - 1 = eps n

with ``alpha = 0`` for a cold plasma. In one dimension the velocity has
the single component ``v_x``; in two and three dimensions it always has
three components, with fields independent of ``z`` in 2-d (slab symmetry),
so the magnetic rotation keeps its meaning.

Time stepping is Strang splitting: an exact half rotation of ``(v_y, v_z)``,
a classical RK4 step of everything else (potential re-solved at each
stage, warm-started from the previous one), and a second half rotation.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolation, DensityFloorViolated, NoConvergence
from .poisson import SolverConfig, scaled_potential

__all__ = [
    "PlasmaParams",
    "PlasmaState",
    "ConservationLog",
    "SimulationResult",
    "n_velocity_components",
    "make_state",
    "rhs",
    "rotation_substep",
    "step",
    "cfl_limit",
    "hamiltonian",
    "impulse",
    "simulate",
]


@dataclass(frozen=True)
class PlasmaParams:
    eps: float
    a: float
    alpha: float = 0.0
    c0: float = 0.5
    isothermal: bool = False

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.a < 0:
            raise ValueError("a must be non-negative")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")

    @property
    def omega(self):
        """Rotation rate ``a / sqrt(eps)`` of the magnetic term."""
        return self.a / math.sqrt(self.eps)

    @property
    def has_pressure(self):
        """Whether the pressure term is assembled (always for the isothermal model)."""
        return self.isothermal or self.alpha > 0


def n_velocity_components(grid):
    return 1 if grid.dim == 1 else 3


@dataclass
class PlasmaState:
    grid: object
    n: np.ndarray
    v: np.ndarray
    phi: np.ndarray
    t: float = 0.0

    def copy(self):
        return PlasmaState(self.grid, self.n.copy(), self.v.copy(), self.phi.copy(), self.t)


def _check_density(n, params):
    floor = float(np.min(1.0 + params.eps * n))
    if floor < params.c0 / 2:
        raise DensityFloorViolated(
            f"min(1 + eps*n) = {floor:.4g} below c0/2 = {params.c0 / 2:.4g}"
        )


def make_state(grid, n, v=None, params=None, cfg=None, t=0.0):
    """Assemble a state, solving the potential equation for ``phi``."""
    n = np.asarray(n, dtype=float)
    ncomp = n_velocity_components(grid)
    if v is None:
        v = np.zeros((ncomp,) + grid.shape)
    v = np.asarray(v, dtype=float)
    if v.shape != (ncomp,) + grid.shape:
        raise ValueError(f"velocity must have shape {(ncomp,) + grid.shape}")
    if params is None:
        raise ValueError("params are required to solve for phi")
    _check_density(n, params)
    phi = scaled_potential(grid, n, params.eps, cfg or SolverConfig())
    return PlasmaState(grid, n, v, phi, t)


def _transport(state, params, n, v, phi):
    """Non-rotational part of the right-hand side (dealiased products)."""
    g = state.grid
    eps = params.eps
    dim = g.dim
    grads_v = [[g.derivative(v[i], j) for j in range(dim)] for i in range(v.shape[0])]
    grad_phi = g.gradient(phi)
    rho = 1.0 + eps * n
    dn = np.zeros_like(n)
    for j in range(dim):
        dn -= g.derivative(g.dealias(rho * v[j]), j)
    dv = np.empty_like(v)
    pressure = params.has_pressure
    grad_n = g.gradient(n) if pressure else None
    for i in range(v.shape[0]):
        adv = sum(v[j] * grads_v[i][j] for j in range(dim))
        dv[i] = -eps * g.dealias(adv)
        if i < dim:
            dv[i] -= grad_phi[i]
            if pressure:
                dv[i] -= params.alpha * g.dealias(grad_n[i] / rho)
    return dn, dv


def _rotation_term(v, params):
    out = np.zeros_like(v)
    if v.shape[0] == 3:
        w = params.omega
        out[1] = w * v[2]
        out[2] = -w * v[1]
    return out


def rhs(state, params, cfg=None, include_rotation=True):
    """``(dn/dt, dv/dt)`` with the potential re-solved from ``state.n``."""
    _check_density(state.n, params)
    cfg = cfg or SolverConfig()
    phi = scaled_potential(state.grid, state.n, params.eps, cfg, state.phi)
    dn, dv = _transport(state, params, state.n, state.v, phi)
    if include_rotation:
        dv += _rotation_term(state.v, params)
    return dn, dv


def rotation_substep(v, dt, params):
    """Exact flow of ``dv/dt = -a eps^{-1/2} e x v`` over ``dt``.

    ``v_x`` is untouched and ``(v_y, v_z)`` rotate by ``theta = a dt/sqrt(eps)``;
    a one-component (1-d) velocity is returned unchanged.
    """
    if v.shape[0] != 3:
        return v.copy()
    theta = params.omega * dt
    ct, st = math.cos(theta), math.sin(theta)
    out = v.copy()
    out[1] = ct * v[1] + st * v[2]
    out[2] = -st * v[1] + ct * v[2]
    return out


def cfl_limit(grid, state, params):
    vmax = float(np.max(np.abs(state.v))) if state.v.size else 0.0
    return 0.4 * min(grid.spacing) / (1.0 + params.eps * vmax + math.sqrt(1.0 + params.alpha))


def step(state, dt, params, cfg=None):
    """One Strang step: half rotation, RK4 transport, half rotation."""
    cfg = cfg or SolverConfig()
    g = state.grid
    if abs(dt) > cfl_limit(g, state, params) * (1 + 1e-12):
        raise CFLViolation(f"|dt|={abs(dt):.4g} exceeds CFL limit {cfl_limit(g, state, params):.4g}")
    eps = params.eps

    def stage(n, v, phi_guess):
        _check_density(n, params)
        phi = scaled_potential(g, n, eps, cfg, phi_guess)
        dn, dv = _transport(state, params, n, v, phi)
        return dn, dv, phi

    v0 = rotation_substep(state.v, 0.5 * dt, params)
    n0 = state.n
    k1n, k1v, phi1 = stage(n0, v0, state.phi)
    k2n, k2v, phi2 = stage(n0 + 0.5 * dt * k1n, v0 + 0.5 * dt * k1v, phi1)
    k3n, k3v, phi3 = stage(n0 + 0.5 * dt * k2n, v0 + 0.5 * dt * k2v, phi2)
    k4n, k4v, phi4 = stage(n0 + dt * k3n, v0 + dt * k3v, phi3)
    n1 = n0 + (dt / 6.0) * (k1n + 2 * k2n + 2 * k3n + k4n)
    v1 = v0 + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    v1 = rotation_substep(v1, 0.5 * dt, params)
    _check_density(n1, params)
    phi = scaled_potential(g, n1, eps, cfg, phi4)
    return PlasmaState(g, n1, v1, phi, state.t + dt)


def _energy_density(u):
    """``exp(u)(u - 1) + 1`` without cancellation for small ``u``."""
    small = np.abs(u) < 1e-3
    series = u**2 * (0.5 + u * (1.0 / 3.0 + u * (1.0 / 8.0 + u / 30.0)))
    direct = u * np.expm1(u) - np.expm1(u) + u
    return np.where(small, series, direct)


def hamiltonian(state, params, normalized=False):
    """Energy of the unscaled system evaluated on the scaled state.

    Uses ``n_u = eps n``, ``phi_u = eps phi``, ``v_u = eps v`` on
    coordinates stretched by ``eps^{-1/2}``:

        H = eps^{-d/2} int [ 1/2 (1+eps n) eps^2 |v|^2 + 1/2 eps^3 |grad phi|^2
                             + exp(eps phi)(eps phi - 1) + 1 ] dx.

    With ``normalized=True`` the value is divided by ``eps^2``.
    """
    g = state.grid
    eps = params.eps
    grad_phi = g.gradient(state.phi)
    density = (
        0.5 * (1.0 + eps * state.n) * eps**2 * np.sum(state.v**2, axis=0)
        + 0.5 * eps**3 * np.sum(grad_phi**2, axis=0)
        + _energy_density(eps * state.phi)
    )
    H = g.integrate(density) * eps ** (-g.dim / 2)
    return H / eps**2 if normalized else H


def impulse(state, params):
    """``int (1 + eps n) v dx``, one entry per velocity component."""
    rho = 1.0 + params.eps * state.n
    return np.array([state.grid.integrate(rho * vi) for vi in state.v])


LOG_FIELDS = ("t", "H", "Px", "Py", "Pz", "l2_n", "l2_v", "hs_n", "hseps_v")


@dataclass
class ConservationLog:
    s: float = 3.0
    rows: list = field(default_factory=list)

    def record(self, state, params):
        if self.rows and not state.t > self.rows[-1][0]:
            raise ValueError("log timestamps must increase")
        g = state.grid
        H = hamiltonian(state, params, normalized=True) if params.alpha == 0 else math.nan
        P = list(impulse(state, params)) + [0.0] * (3 - state.v.shape[0])
        self.rows.append(
            (
                state.t,
                H,
                *P,
                g.l2_norm(state.n),
                g.sobolev_norm(state.v, 0),
                g.sobolev_norm(state.n, self.s),
                g.hs_eps_norm(state.v, self.s, params.eps),
            )
        )

    def column(self, name):
        i = LOG_FIELDS.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self, comment=None):
        buf = io.StringIO()
        if comment:
            buf.write(f"# {comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_FIELDS)
        for r in self.rows:
            w.writerow([repr(float(x)) for x in r])
        return buf.getvalue()


@dataclass
class SimulationResult:
    final: PlasmaState
    log: ConservationLog
    snapshots: dict
    aborted: str | None = None

    @property
    def completed(self):
        return self.aborted is None


def simulate(initial, params, horizon, dt, cfg=None, snapshot_every=0, log_every=1, s=3.0, callback=None):
    """Integrate to ``initial.t + horizon`` in equal steps no larger than ``dt``.

    On a density-floor or solver failure the run stops and the result holds
    the last good state with ``aborted`` set to the reason.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    cfg = cfg or SolverConfig()
    log = ConservationLog(s=s)
    log.record(initial, params)
    snaps = {initial.t: initial.copy()} if snapshot_every else {}
    if horizon == 0:
        return SimulationResult(initial, log, snaps)
    nsteps = max(1, math.ceil(horizon / dt - 1e-12))
    h = horizon / nsteps
    state = initial
    t0 = initial.t
    for i in range(1, nsteps + 1):
        try:
            new = step(state, h, params, cfg)
        except (DensityFloorViolated, NoConvergence, CFLViolation) as exc:
            return SimulationResult(state, log, snaps, aborted=f"{type(exc).__name__}: {exc}")
        new.t = t0 + i * h
        state = new
        if i % log_every == 0 or i == nsteps:
            log.record(state, params)
        if snapshot_every and (i % snapshot_every == 0 or i == nsteps):
            snaps[state.t] = state.copy()
        if callback is not None:
            callback(state)
    return SimulationResult(state, log, snaps)


def with_params(params, **changes):
    return dataclasses.replace(params, **changes)
