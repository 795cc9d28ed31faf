"""Profiles of the ZK approximate solution and their residuals.

The scaled Euler-Poisson system is approximated by

    n   = n1 + eps n2,            phi = phi1 + eps phi2,
    v_x = vx1 + eps vx2,
    v_y = sqrt(eps) vy1 + eps vy2,  v_z = sqrt(eps) vz1 + eps vz2,

every profile evaluated at ``X = x - c t`` and slow time ``T = eps t``,
with ``c = sqrt(1 + alpha)``. Writing ``b1 = (1+alpha)/a`` and
``b2 = c (1+alpha)/a^2`` the profiles are, in terms of ``n1`` alone,

    phi1 = n1,  vx1 = c n1,
    vy1 = -b1 dz n1,  vz1 = b1 dy n1,
    vy2 = b2 dXdy n1,  vz2 = b2 dXdz n1,
    phi2 = ((1+alpha)/a^2) dXX n1 + (alpha/(1+alpha)) Lap n1,
    n2 = phi2 - Lap n1 + n1^2/2.

``vx2`` is fixed by two independent balances (the order-eps density
equation and the order-eps longitudinal momentum equation); they agree
exactly when ``n1`` solves the ZK equation of :func:`zklab.zk.zk_coeffs`.
The stored ``vx2`` is their average, which does not involve ``dT n1``.

The grid's first axis is ``X``; the others are ``y`` and ``z``. In two
dimensions fields do not depend on ``z``; in one dimension only the
longitudinal profiles exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import FrameMismatch, InconsistentProfiles
from .plasma import PlasmaState, n_velocity_components
from .zk import zk_coeffs, zk_rhs

__all__ = [
    "ProfileSet",
    "ResidualReport",
    "build_profiles",
    "build_cold_profiles",
    "build_isothermal_profiles",
    "vx2_mismatch",
    "check_invariants",
    "evaluate_ansatz",
    "residuals",
    "order12_cancellation_check",
    "PROFILE_NAMES",
]

PROFILE_NAMES = ("n1", "n2", "phi1", "phi2", "vx1", "vx2", "vy1", "vy2", "vz1", "vz2")
CONSISTENCY_TOL = 1e-8


@dataclass
class ProfileSet:
    grid: object
    n1: np.ndarray
    n2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    vx1: np.ndarray
    vx2: np.ndarray
    vy1: np.ndarray
    vy2: np.ndarray
    vz1: np.ndarray
    vz2: np.ndarray
    n1_T: np.ndarray
    c: float
    a: float
    alpha: float = 0.0
    T: float = 0.0

    def fields(self):
        return {name: getattr(self, name) for name in PROFILE_NAMES}

    def replace(self, **changes):
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return ProfileSet(**kw)


def _d(grid, f, *axes):
    """Mixed spectral derivative; axes beyond the grid dimension give zero."""
    if any(ax >= grid.dim for ax in axes):
        return np.zeros(grid.shape)
    fh = grid.fft(f)
    for ax in axes:
        fh = 1j * grid.k(ax) * fh
    return grid.ifft(fh)


def _laplacian_perp(grid, f):
    out = np.zeros(grid.shape)
    for ax in range(1, grid.dim):
        out += grid.derivative(f, ax, 2)
    return out


def _antiderivative_X(grid, f):
    """Spectral primitive in ``X``; modes with ``k_X = 0`` are set to zero."""
    kx = grid.k(0)
    safe = np.where(kx == 0, 1.0, kx)
    return grid.ifft(np.where(kx == 0, 0.0, grid.fft(f) / (1j * safe)))


def _mean_free_X(grid, f):
    kx = grid.k(0)
    return grid.ifft(np.where(kx == 0, 0.0, grid.fft(f)))


def _x_mean_part(grid, f):
    kx = grid.k(0)
    return grid.ifft(np.where(kx == 0, grid.fft(f), 0.0))


def _constants(a, alpha):
    c = math.sqrt(1.0 + alpha)
    return c, (1.0 + alpha) / a, c * (1.0 + alpha) / a**2


def _second_order(grid, n1, a, alpha):
    """``(phi2, n2, vx2)`` as pure functions of ``n1`` (all at most quadratic)."""
    c, _, b2 = _constants(a, alpha)
    lap = grid.laplacian(n1)
    phi2 = ((1.0 + alpha) / a**2) * grid.derivative(n1, 0, 2) + (alpha / (1.0 + alpha)) * lap
    sq = n1 * n1
    n2 = phi2 - lap + 0.5 * sq
    lap_perp = _laplacian_perp(grid, n1)
    route_a = c * n2 - c * sq - b2 * lap_perp
    route_b = 0.5 * c * sq + (phi2 + alpha * n2 - 0.5 * alpha * sq) / c
    return phi2, n2, 0.5 * (route_a + route_b)


def _vx2_routes(grid, n1, n1_T, a, alpha):
    c, _, b2 = _constants(a, alpha)
    phi2, n2, _ = _second_order(grid, n1, a, alpha)
    sq = n1 * n1
    prim = _antiderivative_X(grid, n1_T)
    route_a = -prim + c * n2 - c * sq - b2 * _laplacian_perp(grid, n1)
    route_b = prim + 0.5 * c * sq + (phi2 + alpha * n2 - 0.5 * alpha * sq) / c
    return route_a, route_b


def vx2_mismatch(grid, n1, n1_T, a, alpha=0.0):
    """Relative disagreement of the two ``vx2`` balances.

    Counts the ``X``-dependent part of their difference and any ``X``-mean
    content of ``dT n1`` (which a ZK solution cannot have); zero exactly when
    ``n1_T`` is the ZK time derivative of ``n1``.
    """
    route_a, route_b = _vx2_routes(grid, n1, n1_T, a, alpha)
    scale = max(grid.l2_norm(route_a), grid.l2_norm(route_b), grid.l2_norm(n1_T))
    if scale == 0:
        return 0.0
    miss = math.hypot(
        grid.l2_norm(_mean_free_X(grid, route_a - route_b)),
        grid.l2_norm(_x_mean_part(grid, n1_T)),
    )
    return miss / scale


def zk_time_derivative(grid, n1, a, alpha=0.0):
    """``dT n1`` from the ZK equation, with the quadratic term kept exact."""
    return zk_rhs(grid, n1, zk_coeffs(a, alpha), dealiased=False)


def build_profiles(grid, n1, a, alpha=0.0, T=0.0, n1_T=None, tol=CONSISTENCY_TOL):
    """Build every profile from ``n1`` at slow time ``T``.

    ``n1_T`` defaults to the ZK right-hand side. A supplied ``n1_T`` is
    checked against the two ``vx2`` balances and rejected with
    :class:`InconsistentProfiles` if they disagree beyond ``tol``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    n1 = np.asarray(n1, dtype=float)
    if n1.shape != grid.shape:
        raise ValueError("n1 does not match the grid")
    if n1_T is None:
        n1_T = zk_time_derivative(grid, n1, a, alpha)
    else:
        n1_T = np.asarray(n1_T, dtype=float)
        miss = vx2_mismatch(grid, n1, n1_T, a, alpha)
        if miss > tol:
            raise InconsistentProfiles(
                f"vx2 balances disagree by {miss:.3e} (> {tol:.1e}); n1 does not solve ZK"
            )
    c, b1, b2 = _constants(a, alpha)
    phi2, n2, vx2 = _second_order(grid, n1, a, alpha)
    return ProfileSet(
        grid=grid,
        n1=n1,
        n2=n2,
        phi1=n1.copy(),
        phi2=phi2,
        vx1=c * n1,
        vx2=vx2,
        vy1=-b1 * _d(grid, n1, 2),
        vy2=b2 * _d(grid, n1, 0, 1),
        vz1=b1 * _d(grid, n1, 1),
        vz2=b2 * _d(grid, n1, 0, 2),
        n1_T=n1_T,
        c=c,
        a=float(a),
        alpha=float(alpha),
        T=float(T),
    )


def build_cold_profiles(grid, n1, a, T=0.0, n1_T=None):
    return build_profiles(grid, n1, a, 0.0, T, n1_T)


def build_isothermal_profiles(grid, n1, a, alpha, T=0.0, n1_T=None):
    return build_profiles(grid, n1, a, alpha, T, n1_T)


def check_invariants(p, tol=1e-12):
    """Largest relative deviation of the stored profiles from a rebuild of ``p.n1``."""
    fresh = build_profiles(p.grid, p.n1, p.a, p.alpha, p.T, n1_T=None)
    worst = 0.0
    scale = max(p.grid.l2_norm(p.n1), 1e-300)
    for name in PROFILE_NAMES:
        dev = p.grid.l2_norm(getattr(p, name) - getattr(fresh, name)) / scale
        worst = max(worst, dev)
    return worst, worst <= tol


# --- evaluation of the ansatz --------------------------------------------------

def _tangent(p):
    """``dT`` of every profile, by polarization (each profile is at most quadratic in n1)."""
    g, h = p.grid, p.n1_T
    plus = build_profiles(g, p.n1 + h, p.a, p.alpha)
    minus = build_profiles(g, p.n1 - h, p.a, p.alpha)
    return {name: 0.5 * (getattr(plus, name) - getattr(minus, name)) for name in PROFILE_NAMES}


def _assemble(p, eps, fieldset=None):
    f = p.fields() if fieldset is None else fieldset
    r = math.sqrt(eps)
    n = f["n1"] + eps * f["n2"]
    phi = f["phi1"] + eps * f["phi2"]
    vx = f["vx1"] + eps * f["vx2"]
    vy = r * f["vy1"] + eps * f["vy2"]
    vz = r * f["vz1"] + eps * f["vz2"]
    return n, phi, vx, vy, vz


def evaluate_ansatz(p, eps, t, check_frame=True):
    """The approximate solution at fast time ``t`` as a :class:`PlasmaState`.

    ``p`` must describe slow time ``T = eps t``. The frame shift by ``c t`` is
    an exact spectral translation. ``phi`` is the ansatz potential, not a
    re-solved one.
    """
    if check_frame and abs(p.T - eps * t) > 1e-12 * max(1.0, abs(p.T)):
        raise FrameMismatch(f"profiles are at T={p.T}, but eps*t = {eps * t}")
    g = p.grid
    n, phi, vx, vy, vz = _assemble(p, eps)
    shift = p.c * t

    def move(f):
        return g.shift(f, shift, 0) if shift else f.copy()

    ncomp = n_velocity_components(g)
    comps = [vx] if ncomp == 1 else [vx, vy, vz]
    v = np.stack([move(f) for f in comps])
    return PlasmaState(g, move(n), v, move(phi), t)


@dataclass(frozen=True)
class ResidualReport:
    eps: float
    s: float
    N_norm: float
    R_norms: tuple
    r_norm: float

    @property
    def res_n(self):
        return self.N_norm

    @property
    def res_vx(self):
        return self.R_norms[0]

    @property
    def res_vy(self):
        return self.R_norms[1]

    @property
    def res_vz(self):
        return self.R_norms[2]

    @property
    def res_transverse(self):
        return math.hypot(self.R_norms[1], self.R_norms[2])

    @property
    def res_phi(self):
        return self.r_norm

    def row(self):
        return (self.eps, self.res_n, self.res_vx, self.res_vy, self.res_vz, self.res_phi)


def residual_fields(p, eps):
    """Pointwise residuals of the three equations for the ansatz at ``eps``.

    Evaluated in the moving frame (translation commutes with the equations),
    with ``dt = -c dX + eps dT``.
    """
    g = p.grid
    dim = g.dim
    n, phi, vx, vy, vz = _assemble(p, eps)
    tan = _assemble(p, eps, _tangent(p))
    n_t = -p.c * g.derivative(n, 0) + eps * tan[0]
    v = [vx, vy, vz]
    v_t = [-p.c * g.derivative(v[i], 0) + eps * tan[2 + i] for i in range(3)]

    def grad(f):
        return [_d(g, f, ax) for ax in range(3)]

    rho = 1.0 + eps * n
    N = n_t + sum(_d(g, rho * v[j], j) for j in range(dim))
    grad_phi = grad(phi)
    grad_n = grad(n)
    omega = p.a / math.sqrt(eps)
    rot = [np.zeros(g.shape), -omega * vz, omega * vy]
    R = []
    for i in range(3):
        gv = grad(v[i])
        adv = sum(v[j] * gv[j] for j in range(dim))
        R.append(v_t[i] + eps * adv + grad_phi[i] + p.alpha * grad_n[i] / rho + rot[i])
    r = -(eps**2) * g.laplacian(phi) + np.expm1(eps * phi) - eps * n
    if dim == 1:
        R[1] = np.zeros(g.shape)
        R[2] = np.zeros(g.shape)
    return N, R, r


def residuals(p, eps, s=0.0):
    """Norms of the ansatz residuals in ``H^s`` (``s = 0``: plain L2)."""
    g = p.grid
    N, R, r = residual_fields(p, eps)
    return ResidualReport(
        eps=float(eps),
        s=float(s),
        N_norm=g.sobolev_norm(N, s),
        R_norms=tuple(g.sobolev_norm(Ri, s) for Ri in R),
        r_norm=g.sobolev_norm(r, s),
    )


# --- order-by-order cancellations ------------------------------------------------

def _combinations(p):
    g = p.grid
    c, al, a = p.c, p.alpha, p.a
    D = lambda f, *ax: _d(g, f, *ax)  # noqa: E731
    n1, n2 = p.n1, p.n2
    lap = g.laplacian
    return {
        "N0": [-c * D(n1, 0), D(p.vx1, 0)],
        "N1": [D(p.vy1, 1), D(p.vz1, 2)],
        "N2": [
            p.n1_T,
            -c * D(n2, 0),
            D(n1 * p.vx1, 0),
            D(p.vx2, 0),
            D(p.vy2, 1),
            D(p.vz2, 2),
        ],
        "N3": [D(n1 * p.vy1, 1), D(n1 * p.vz1, 2)],
        "R1_0": [-c * D(p.vx1, 0), D(p.phi1, 0), al * D(n1, 0)],
        "R1_2": [
            c * p.n1_T,
            -c * D(p.vx2, 0),
            p.vx1 * D(p.vx1, 0),
            D(p.phi2, 0),
            al * D(n2, 0),
            -al * n1 * D(n1, 0),
        ],
        "R1_3": [p.vy1 * D(p.vx1, 1), p.vz1 * D(p.vx1, 2)],
        "R2_0": [D(p.phi1, 1), al * D(n1, 1), -a * p.vz1],
        "R2_1": [-c * D(p.vy1, 0), -a * p.vz2],
        "R2_2": [-c * D(p.vy2, 0), D(p.phi2, 1), al * D(n2, 1), -al * n1 * D(n1, 1)],
        "R3_0": [D(p.phi1, 2), al * D(n1, 2), a * p.vy1],
        "R3_1": [-c * D(p.vz1, 0), a * p.vy2],
        "R3_2": [-c * D(p.vz2, 0), D(p.phi2, 2), al * D(n2, 2), -al * n1 * D(n1, 2)],
        "r2": [p.phi1, -n1],
        "r4": [-lap(p.phi1), p.phi2, 0.5 * p.phi1**2, -n2],
    }


def order12_cancellation_check(p, tol=1e-9):
    """Relative size of every order-by-order cancellation combination.

    Each entry is ``|sum of terms| / max |term|`` (zero when all terms
    vanish). ``vx1`` enters ``R1_2`` through ``dT vx1 = c dT n1``.
    Returns ``{"values": {...}, "failed": [...], "passed": bool}``.
    """
    g = p.grid
    values = {}
    for name, terms in _combinations(p).items():
        scale = max(g.l2_norm(t) for t in terms)
        values[name] = 0.0 if scale == 0 else g.l2_norm(sum(terms)) / scale
    failed = [k for k, v in values.items() if not v <= tol]
    return {"values": values, "failed": failed, "passed": not failed, "tol": tol}
