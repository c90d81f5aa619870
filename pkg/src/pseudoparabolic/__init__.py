"""Legendre spectral G-NI discretization and SSP-SDIRK time stepping for
pseudo-parabolic systems ``(I - (A u_x)_x) u_t = -(B u_x)_x + G(u)_x + gamma``."""

from .assembly import SemiDiscretization, State
from .errors import (ConfigurationError, ConvergenceError, DomainError, PseudoParabolicError,
                     SingularMatrixError, ValidityError)
from .harness import error_norms, run_convergence, run_riemann, run_traveling
from .problems import PROBLEM_NAMES, get_problem
from .sdirk import SSP22, SSP23, SolverConfig, integrate, sdirk_step
from .spectral import build_grid
from .system import SystemDef, homogenize

__version__ = "0.1.0"

__all__ = [
    "SemiDiscretization", "State", "ConfigurationError", "ConvergenceError", "DomainError",
    "PseudoParabolicError", "SingularMatrixError", "ValidityError", "error_norms", "run_convergence",
    "run_riemann", "run_traveling", "PROBLEM_NAMES", "get_problem", "SSP22", "SSP23", "SolverConfig",
    "integrate", "sdirk_step", "build_grid", "SystemDef", "homogenize",
]
