"""Nonlinear Poisson equation for the electric potential.

Unscaled problem::

    -Lap(phi) + exp(phi) - 1 = n

Long-wave scaled problem (``eps`` in (0, 1])::

    -eps^2 Lap(phi) + exp(eps*phi) - 1 = eps*n

Both are solved by Newton's method; each Newton correction inverts the
linearized operator ``M_eps(phi) = -eps*Lap + exp(eps*phi)`` with a
conjugate-gradient iteration preconditioned by the exact Fourier inverse of
``-eps*Lap + mean(exp(eps*phi))``. The unscaled problem is the case
``eps = 1``. The monotone sub-solution iteration is kept as an independent
check that also certifies the pointwise bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DensityFloorViolated, MonotonicityViolated, NoConvergence
from .grid import Grid

__all__ = [
    "SolverConfig",
    "PoissonDiagnostics",
    "solve_unscaled",
    "solve_scaled",
    "monotone_solve",
    "apply_M",
    "invert_M",
    "poisson_residual",
    "diagnostics",
]


@dataclass
class SolverConfig:
    tol: float = 1e-11
    max_iter: int | None = None
    lam: float | None = None
    warm_start: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class PoissonDiagnostics:
    c_inf: float
    I1: float
    bound_lo: float
    bound_hi: float
    energy_lhs: float
    iterations: int
    residual: float

    @property
    def bounds_apply(self):
        return math.isfinite(self.bound_lo)

    def as_record(self):
        return {
            "c_inf": self.c_inf,
            "I1": self.I1,
            "bound_lo": self.bound_lo,
            "bound_hi": self.bound_hi,
            "energy_lhs": self.energy_lhs,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def apply_M(grid, phi, u, eps):
    """``M_eps(phi) u = -eps*Lap(u) + exp(eps*phi) u``."""
    return -eps * grid.laplacian(u) + np.exp(eps * phi) * u


def _pcg(grid, weight, eps, rhs, tol, max_iter=500, x0=None):
    """Solve ``(-eps*Lap + weight) u = rhs`` to an absolute L2 residual ``tol``."""
    shift = float(np.mean(weight))
    precond = 1.0 / (eps * grid.k2 + shift)

    def A(u):
        return -eps * grid.laplacian(u) + weight * u

    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    r = rhs - A(x) if x0 is not None else rhs.copy()
    rnorm = grid.l2_norm(r)
    if rnorm <= tol:
        return x, 0
    z = grid.apply_symbol(r, precond)
    p = z.copy()
    rz = grid.inner(r, z)
    for it in range(1, max_iter + 1):
        Ap = A(p)
        alpha = rz / grid.inner(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        rnorm = grid.l2_norm(r)
        if rnorm <= tol:
            return x, it
        z = grid.apply_symbol(r, precond)
        rz_new = grid.inner(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise NoConvergence(
        f"inner CG did not reach {tol:.3g} in {max_iter} iterations", max_iter, rnorm
    )


def invert_M(grid, phi, v, eps, cfg=None):
    """Solve ``M_eps(phi) u = v`` for ``u``."""
    cfg = cfg or SolverConfig()
    if not eps > 0:
        raise ValueError("eps must be positive")
    max_iter = cfg.max_iter or 500
    u, _ = _pcg(grid, np.exp(eps * phi), eps, np.asarray(v, float), cfg.tol, max_iter)
    return u


def poisson_residual(grid, phi, n, eps=1.0):
    """Pointwise residual ``-eps^2 Lap(phi) + exp(eps*phi) - 1 - eps*n``."""
    return -(eps**2) * grid.laplacian(phi) + np.expm1(eps * phi) - eps * n


def _newton(grid, n, eps, cfg, phi0):
    max_iter = cfg.max_iter or 60
    phi = phi0.copy()
    G = poisson_residual(grid, phi, n, eps)
    res = grid.l2_norm(G)
    it = 0
    while res > cfg.tol:
        if it >= max_iter:
            raise NoConvergence(
                f"Newton stalled at residual {res:.3e} after {it} iterations", it, res
            )
        it += 1
        weight = np.exp(eps * phi)
        inner_tol = max(0.01 * cfg.tol, 1e-4 * res) / eps
        delta, _ = _pcg(grid, weight, eps, -G / eps, inner_tol)
        step = 1.0
        while True:
            trial = phi + step * delta
            G_trial = poisson_residual(grid, trial, n, eps)
            res_trial = grid.l2_norm(G_trial)
            if res_trial < res or step < 1e-3:
                break
            step *= 0.5
        if not res_trial < res:
            # round-off floor reached
            if res_trial <= 10 * cfg.tol:
                phi, G, res = trial, G_trial, res_trial
                break
            raise NoConvergence(
                f"Newton line search failed at residual {res:.3e}", it, res
            )
        phi, G, res = trial, G_trial, res_trial
    return phi, it, res


def diagnostics(grid, n, phi, iterations=0, residual=float("nan")):
    """Quantities entering the a-priori bounds for the unscaled problem."""
    nmax = float(np.max(np.abs(n)))
    c_inf = float(np.min(1.0 + n))
    I1 = grid.l2_norm(n) ** 2 / c_inf + grid.sobolev_norm(n, 1.0) ** 2
    bound_lo = math.log(1.0 - nmax) if nmax < 1 else float("nan")
    bound_hi = math.log1p(nmax)
    grad = grid.gradient(phi)
    grad2 = np.sum(grad**2, axis=0)
    lap = grid.laplacian(phi)
    density = (
        0.5 * c_inf * phi**2
        + 0.5 * grad2
        + lap**2
        + 2.0 * np.exp(phi) * grad2
        + 0.5 * np.expm1(phi) ** 2
    )
    return PoissonDiagnostics(
        c_inf=c_inf,
        I1=I1,
        bound_lo=bound_lo,
        bound_hi=bound_hi,
        energy_lhs=grid.integrate(density),
        iterations=iterations,
        residual=residual,
    )


def _check_floor(n, eps=1.0):
    floor = float(np.min(1.0 + eps * n))
    if not floor > 0:
        raise DensityFloorViolated(f"inf(1 + eps*n) = {floor:.3g} <= 0")


def solve_unscaled(grid, n, cfg=None):
    """Solve ``-Lap(phi) + exp(phi) - 1 = n``; returns ``(phi, diagnostics)``."""
    cfg = cfg or SolverConfig()
    n = np.asarray(n, dtype=float)
    _check_floor(n)
    phi0 = cfg.warm_start if cfg.warm_start is not None else np.log1p(n)
    phi, it, res = _newton(grid, n, 1.0, cfg, phi0)
    return phi, diagnostics(grid, n, phi, it, res)


def solve_scaled(grid, n, eps, cfg=None):
    """Solve ``-eps^2 Lap(phi) + exp(eps*phi) - 1 = eps*n``.

    The diagnostics describe the equivalent unscaled problem for
    ``eps*n`` on the box stretched by ``1/sqrt(eps)``, with bounds and
    potential converted back to the scaled variable.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    cfg = cfg or SolverConfig()
    n = np.asarray(n, dtype=float)
    _check_floor(n, eps)
    phi0 = cfg.warm_start if cfg.warm_start is not None else np.log1p(eps * n) / eps
    phi, it, res = _newton(grid, n, eps, cfg, phi0)
    stretched = Grid(grid.points, [L / math.sqrt(eps) for L in grid.lengths])
    d = diagnostics(stretched, eps * n, eps * phi, it, res)
    d.bound_lo /= eps
    d.bound_hi /= eps
    return phi, d


def scaled_potential(grid, n, eps, cfg, phi0=None):
    """Fast path of :func:`solve_scaled` for time stepping: no diagnostics."""
    _check_floor(n, eps)
    if phi0 is None:
        phi0 = np.log1p(eps * n) / eps
    phi, _, _ = _newton(grid, n, eps, cfg, phi0)
    return phi


def monotone_solve(grid, n, cfg=None, callback=None):
    """Sub-solution iteration ``(-Lap + lam) psi = lam*phi - (exp(phi) - 1) + n``.

    Starts from the constant sub-solution ``log(1 - |n|_inf)``; each iterate
    is checked to be pointwise no smaller than the previous one and to stay
    inside ``[log(1-|n|_inf), log(1+|n|_inf)]``.
    """
    cfg = cfg or SolverConfig()
    n = np.asarray(n, dtype=float)
    nmax = float(np.max(np.abs(n)))
    if not nmax < 1:
        raise DensityFloorViolated("monotone iteration needs |n|_inf < 1")
    k_lo = math.log(1.0 - nmax)
    k_hi = math.log1p(nmax)
    lam = cfg.lam if cfg.lam is not None else 2.0 * math.exp(k_hi)
    if not lam > math.exp(k_hi):
        raise ValueError(f"lam={lam} must exceed exp(K+)={math.exp(k_hi):.6g}")
    max_iter = cfg.max_iter or 10000
    slack = 1e-13
    resolvent = 1.0 / (grid.k2 + lam)

    phi = np.full(grid.shape, k_lo)
    res = grid.l2_norm(poisson_residual(grid, phi, n))
    it = 0
    while res > cfg.tol:
        if it >= max_iter:
            raise NoConvergence(f"monotone iteration at residual {res:.3e}", it, res)
        it += 1
        new = grid.apply_symbol(lam * phi - np.expm1(phi) + n, resolvent)
        drop = float(np.max(phi - new))
        if drop > slack:
            raise MonotonicityViolated(f"iterate {it} decreased by {drop:.3e}")
        if new.min() < k_lo - slack or new.max() > k_hi + slack:
            raise MonotonicityViolated(f"iterate {it} left [{k_lo:.6g}, {k_hi:.6g}]")
        phi = new
        res = grid.l2_norm(poisson_residual(grid, phi, n))
        if callback is not None:
            callback(it, phi)
    return phi, diagnostics(grid, n, phi, it, res)
