"""Linear dispersion relation of the magnetized cold-plasma system.

For a plane wave with wave vector ``k`` and field strength ``a`` the
frequency solves the biquadratic

    w^4 + w^2 (a^2 - |k|^2/(1+|k|^2)) - a^2 k1^2/(1+|k|^2) = 0,   w^2 = omega^2,

which is equivalent (away from ``w^2 = 0`` and ``w^2 = -a^2``) to

    (1 + |k|^2) - k1^2/w^2 - |k_perp|^2/(w^2 + a^2) = 0.

Linearizing the time-stepped system itself gives the same relation with
``a^2`` replaced by ``-a^2`` in the resonant factor,

    (1 + |k|^2) - k1^2/w^2 - |k_perp|^2/(w^2 - a^2) = 0,

whose two roots are both non-negative (acoustic and cyclotron branches).
The two forms agree when ``a = 0`` or ``k_perp = 0`` (acoustic root).
:func:`linear_frequencies` returns the roots of this second form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResonantRoot

__all__ = [
    "DispersionRoots",
    "dispersion_roots",
    "biquadratic_residual",
    "equivalent_form_residual",
    "verify_equivalent_form",
    "dispersion_table",
    "linear_frequencies",
]


@dataclass(frozen=True)
class DispersionRoots:
    k: tuple
    a: float
    omega_sq: tuple  # (minus, plus), ascending
    propagating: tuple
    residuals: tuple


def _coefficients(k, a):
    k = np.asarray(k, dtype=float)
    ksq = float(k @ k)
    b = a * a - ksq / (1.0 + ksq)
    c = -a * a * k[0] ** 2 / (1.0 + ksq)
    return b, c


def biquadratic_residual(k, a, w):
    """Relative residual of the quartic at ``w = omega^2``."""
    b, c = _coefficients(k, a)
    scale = max(w * w, abs(b * w), abs(c), 1e-300)
    return abs(w * w + b * w + c) / scale


def dispersion_roots(k, a):
    k = tuple(float(x) for x in np.broadcast_to(np.asarray(k, dtype=float), (3,)))
    a = float(a)
    b, c = _coefficients(k, a)
    disc = math.hypot(b, 2.0 * math.sqrt(-c))  # c <= 0; hypot avoids underflow
    q = -0.5 * (b + math.copysign(disc, b))
    if q == 0.0:
        roots = (0.0, 0.0)
    else:
        roots = tuple(sorted((q, c / q)))
    return DispersionRoots(
        k=k,
        a=a,
        omega_sq=roots,
        propagating=tuple(w >= 0.0 for w in roots),
        residuals=tuple(biquadratic_residual(k, a, w) for w in roots),
    )


def equivalent_form_residual(k, a, w):
    k = np.asarray(k, dtype=float)
    if w == 0.0 or w + a * a == 0.0:
        raise ResonantRoot(f"omega^2 = {w} is excluded from the equivalent form")
    ksq = float(k @ k)
    kperp = float(k[1] ** 2 + k[2] ** 2)
    terms = (1.0 + ksq, k[0] ** 2 / w, kperp / (w + a * a))
    return abs(terms[0] - terms[1] - terms[2]) / max(abs(t) for t in terms)


def verify_equivalent_form(roots):
    """Residual of the equivalent form for every root with ``omega^2 > 0``.

    Returns ``{omega_sq: relative_residual}``. Asking to verify a set with
    no strictly positive root raises :class:`ResonantRoot`.
    """
    checked = {
        w: equivalent_form_residual(roots.k, roots.a, w) for w in roots.omega_sq if w > 0
    }
    if not checked:
        raise ResonantRoot(f"no root with omega^2 > 0 for k={roots.k}, a={roots.a}")
    return checked


def dispersion_table(k_values, a_values):
    """Rows ``(k1, k2, k3, a, omega2_minus, omega2_plus)`` over a lattice."""
    rows = []
    for a in a_values:
        for k in k_values:
            r = dispersion_roots(k, a)
            rows.append((*r.k, r.a, *r.omega_sq))
    return rows


def linear_frequencies(k, a):
    """Roots ``(w_minus, w_plus)`` of ``w^2 - w (a^2 + K) + a^2 k1^2/(1+|k|^2) = 0``.

    ``K = |k|^2/(1+|k|^2)``; ``w = omega^2`` in unscaled units. These are the
    small-amplitude frequencies of the cold magnetized system.
    """
    k = np.broadcast_to(np.asarray(k, dtype=float), (3,))
    ksq = float(k @ k)
    b = a * a + ksq / (1.0 + ksq)
    c = a * a * k[0] ** 2 / (1.0 + ksq)
    disc = math.sqrt(max(b * b - 4.0 * c, 0.0))
    hi = 0.5 * (b + disc)
    lo = c / hi if hi > 0 else 0.0
    return lo, hi
