"""Numerical lab for the magnetized Euler-Poisson system and its
Zakharov-Kuznetsov long-wave limit."""

__version__ = "0.1.0"

from .dispersion import dispersion_roots, verify_equivalent_form
from .errors import (
    CFLViolation,
    ConfigError,
    DensityFloorViolated,
    FieldFormatError,
    FrameMismatch,
    GridError,
    InconsistentProfiles,
    MonotonicityViolated,
    NoConvergence,
    ParseError,
    ResonantRoot,
    ValidationError,
    ZKLabError,
)
from .grid import Grid, load_field, make_grid, save_field
from .plasma import PlasmaParams, PlasmaState, hamiltonian, impulse, make_state, simulate, step
from .poisson import SolverConfig, monotone_solve, solve_scaled, solve_unscaled
from .profiles import ProfileSet, build_profiles, evaluate_ansatz, residuals
from .zk import ZKCoefficients, zk_coeffs, zk_solve, zk_step
