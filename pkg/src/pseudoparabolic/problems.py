"""Benchmark problems with exact or reference solutions, and the problem registry."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .system import SystemDef, constant_boundary, constant_matrix_field, zero_vector_field

# Problem 1: smooth manufactured solution on [-pi, pi].

P1_A = np.array([[2.0, 1.0], [0.0, 2.0]])
P1_B = np.eye(2)


def quadratic_flux(u):
    u = np.asarray(u, dtype=float)
    return np.stack([u[0] * u[1], u[0] ** 2])


def quadratic_flux_jacobian(u):
    u = np.asarray(u, dtype=float)
    z = np.zeros_like(u[0])
    return np.array([[u[1], u[0]], [2.0 * u[0], z]])


def p1_exact(x, t):
    x = np.asarray(x, dtype=float)
    s = np.sin(x)
    return np.stack([x + np.exp(-t) * s, (1.0 + t) * s])


def _p1_derivatives(x, t):
    x = np.asarray(x, dtype=float)
    s, c, e = np.sin(x), np.cos(x), np.exp(-t)
    return {
        "u": np.stack([x + e * s, (1 + t) * s]),
        "u_x": np.stack([1 + e * c, (1 + t) * c]),
        "u_xx": np.stack([-e * s, -(1 + t) * s]),
        "u_t": np.stack([-e * s, s]),
        "u_tx": np.stack([-e * c, c]),
        "u_txx": np.stack([e * s, -s]),
    }


def p1_time_derivative(x, t):
    return _p1_derivatives(x, t)["u_t"]


def _p1_flux_x(dv):
    u, ux = dv["u"], dv["u_x"]
    return np.stack([ux[0] * u[1] + u[0] * ux[1], 2 * u[0] * ux[0]])


def p1a_source(u, x, t):
    """Source making ``p1_exact`` solve the constant-coefficient system."""
    dv = _p1_derivatives(x, t)
    ut, utxx, uxx = dv["u_t"], dv["u_txx"], dv["u_xx"]
    a_term = np.stack([2 * utxx[0] + utxx[1], 2 * utxx[1]])
    return ut - a_term + uxx - _p1_flux_x(dv)


def p1b_A(u):
    u = np.asarray(u, dtype=float)
    z = np.zeros_like(u[0])
    return np.array([[4.0 + u[0], z], [z, 4.0 + u[1]]])


def p1b_B(u):
    u = np.asarray(u, dtype=float)
    return np.array([[u[0], u[1]], [u[1], np.zeros_like(u[0])]])


def p1b_source(u, x, t):
    """Source making ``p1_exact`` solve the system with state-dependent A and B."""
    dv = _p1_derivatives(x, t)
    v, vx, vxx = dv["u"], dv["u_x"], dv["u_xx"]
    vtx, vtxx = dv["u_tx"], dv["u_txx"]
    # (A(u) u_tx)_x with A = diag(4 + u1, 4 + u2).
    a_term = vx * vtx + (4.0 + v) * vtxx
    # (B(u) u_x)_x with B = [[u1, u2], [u2, 0]].
    b_term = np.stack([
        vx[0] ** 2 + v[0] * vxx[0] + vx[1] ** 2 + v[1] * vxx[1],
        vx[1] * vx[0] + v[1] * vxx[0],
    ])
    return dv["u_t"] - a_term + b_term - _p1_flux_x(dv)


def _p1_system(name, A, B, source, constant_A):
    return SystemDef(
        d=2,
        A=A,
        B=B,
        G=quadratic_flux,
        dG=quadratic_flux_jacobian,
        gamma=source,
        u0=lambda x: p1_exact(x, 0.0),
        domain=(-math.pi, math.pi),
        gL=constant_boundary([-math.pi, 0.0]),
        gR=constant_boundary([math.pi, 0.0]),
        dgL=constant_boundary([0.0, 0.0]),
        dgR=constant_boundary([0.0, 0.0]),
        constant_A=constant_A,
        name=name,
    )


# Problem 2: linear system with a separable series solution on [-1, 1].


def mode_data(M):
    """``(lambda_n, alpha_n, beta_n)`` for ``n = 1..M``."""
    n = np.arange(1, M + 1, dtype=float)
    lam = -((n * np.pi / 2.0) ** 2)
    alpha = -lam / (1.0 - 2.0 * lam)
    beta = -(alpha**2)
    return lam, alpha, beta


def series_basis(n, x):
    """``X_n(x) = sin(n pi (x + 1) / 2)``; orthonormal in L2(-1, 1)."""
    n = np.asarray(n, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.sin(np.multiply.outer(n, x + 1.0) * np.pi / 2.0)


def square_pulse(x):
    """Indicator of |x| <= 1/2, with the value 1/2 exactly at the jumps."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return np.where(ax < 0.5, 1.0, np.where(ax == 0.5, 0.5, 0.0))


def hat(x):
    return 1.0 - np.abs(np.asarray(x, dtype=float))


def pulse_coefficients(kind, M):
    """Sine coefficients ``U_n = int U X_n`` of the Problem 2 initial data.

    Returns ``(c1, c2)`` for the two components. Closed forms: for the square
    pulse ``U_n = (2 / (n pi)) (cos(n pi / 4) - cos(3 n pi / 4))``; for the
    hat ``U_n = 8 sin(n pi / 2) / (n pi)^2`` (two integrations by parts, the
    kink at 0 contributes the only term).
    """
    if M < 1:
        raise ConfigurationError("truncation length must be >= 1")
    n = np.arange(1, M + 1, dtype=float)
    if kind == "square":
        c = 2.0 / (n * np.pi) * (np.cos(n * np.pi / 4.0) - np.cos(3.0 * n * np.pi / 4.0))
        return c, c.copy()
    if kind == "hat":
        c = 8.0 * np.sin(n * np.pi / 2.0) / (n * np.pi) ** 2
        return c, np.zeros(M)
    raise ConfigurationError(f"unknown pulse kind {kind!r}; expected 'square' or 'hat'")


@dataclass(frozen=True)
class SeriesSolution:
    """Truncated modal solution of the linear Problem 2 system.

    ``profile1`` and ``profile2`` are the initial data in closed form. When
    present, ``evaluate`` subtracts the slowly converging part analytically:
    since ``alpha_n -> 1/2`` and ``beta_n -> -1/4`` the bulk of every mode is
    ``e^{t/2}`` times the initial data, and only the ``O(n^-2)`` corrections
    are summed.
    """

    c1: np.ndarray
    c2: np.ndarray
    profile1: Optional[Callable] = None
    profile2: Optional[Callable] = None

    @property
    def M(self):
        return len(self.c1)

    @property
    def modes(self):
        return mode_data(self.M)

    def coefficients_at(self, t):
        """Modal coefficients of ``(u1, u2)`` at time ``t``."""
        _, alpha, beta = self.modes
        e = np.exp(t * alpha)
        return e * (self.c1 + t * beta * self.c2), e * self.c2

    def evaluate(self, x, t, accelerate=True):
        x = np.asarray(x, dtype=float)
        n = np.arange(1, self.M + 1)
        basis = series_basis(n, x)
        if not accelerate or self.profile1 is None or self.profile2 is None:
            a1, a2 = self.coefficients_at(t)
            return np.stack([a1 @ basis, a2 @ basis])
        _, alpha, beta = self.modes
        grow = math.exp(t / 2.0)
        damp = np.exp(t * (alpha - 0.5)) - 1.0
        r1 = grow * (damp * self.c1 + t * ((damp + 1.0) * beta + 0.25) * self.c2)
        r2 = grow * damp * self.c2
        p1 = np.asarray(self.profile1(x), dtype=float)
        p2 = np.asarray(self.profile2(x), dtype=float)
        u1 = grow * (p1 - 0.25 * t * p2) + r1 @ basis
        u2 = grow * p2 + r2 @ basis
        return np.stack([u1, u2])

    def tail_bound(self, t, envelope):
        """Bound on the truncation error of the accelerated sum.

        ``envelope`` bounds ``n |U_n|`` for both components. The corrections
        are at most ``e^{t/2} t (|c1| + |c2|) / (2 (1 - 2 lambda_n))``.
        """
        M = self.M
        n = np.arange(M + 1, 50 * M + 1, dtype=float)
        lam = -((n * np.pi / 2.0) ** 2)
        terms = 2.0 * envelope / n * t / (2.0 * (1.0 - 2.0 * lam))
        rest = 2.0 * envelope * t / (2.0 * np.pi**2 * (50 * M) ** 2)
        return math.exp(t / 2.0) * (terms.sum() + rest)


def series_eval(sol, x, t, accelerate=True):
    return sol.evaluate(x, t, accelerate=accelerate)


def series_solution(kind, M=2000):
    c1, c2 = pulse_coefficients(kind, M)
    if kind == "square":
        return SeriesSolution(c1, c2, square_pulse, square_pulse)
    return SeriesSolution(c1, c2, hat, lambda x: np.zeros_like(np.asarray(x, dtype=float)))


def _p2_system(kind):
    if kind == "square":
        def u0(x):
            x = np.asarray(x, dtype=float)
            v = np.where(np.abs(x) <= 0.5, 1.0, 0.0)
            return np.stack([v, v])
    else:
        def u0(x):
            x = np.asarray(x, dtype=float)
            return np.stack([hat(x), np.zeros_like(x)])
    return SystemDef(
        d=2,
        A=constant_matrix_field(P1_A),
        B=constant_matrix_field(P1_B),
        G=zero_vector_field(2),
        dG=lambda u: np.zeros((2, 2) + np.shape(u)[1:]),
        u0=u0,
        domain=(-1.0, 1.0),
        constant_A=True,
        linear=True,
        name=f"p2-{kind}",
    )


# Riemann experiments on [-56, 200].

FRACTIONAL_ALPHA = 0.1
RIEMANN_DOMAIN = (-56.0, 200.0)


def riemann_A(u):
    u = np.asarray(u, dtype=float)
    z = np.zeros_like(u[0])
    return np.array([[1.0 / (1.0 + u[0] ** 2), z], [z, 1.0 / (1.0 + u[1] ** 2)]])


def mobility_total(u, v, alpha=FRACTIONAL_ALPHA):
    """Denominator ``alpha v + (1 - alpha) v^2 + u^2 + (1 - u - v)^2`` of the fractional flux."""
    return alpha * v + (1.0 - alpha) * v**2 + u**2 + (1.0 - u - v) ** 2


class FractionalFlux:
    """Flux ``(u^2, v^2) / lambda(u, v)``, guarded where ``lambda`` vanishes.

    Where ``|lambda| <= tiny`` the flux and its Jacobian are set to zero and
    ``guard_count`` is incremented; the first occurrence warns.
    """

    def __init__(self, alpha=FRACTIONAL_ALPHA, tiny=1e-14):
        self.alpha = alpha
        self.tiny = tiny
        self.guard_count = 0

    def _lam(self, u):
        lam = mobility_total(u[0], u[1], self.alpha)
        bad = np.abs(lam) <= self.tiny
        if np.any(bad):
            if self.guard_count == 0:
                warnings.warn("fractional flux denominator vanished; flux set to zero there",
                              RuntimeWarning, stacklevel=3)
            self.guard_count += int(np.count_nonzero(bad))
        return np.where(bad, 1.0, lam), bad

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        lam, bad = self._lam(u)
        return np.where(bad, 0.0, np.stack([u[0] ** 2, u[1] ** 2]) / lam)

    def jacobian(self, u):
        u = np.asarray(u, dtype=float)
        lam, bad = self._lam(u)
        a = self.alpha
        w = 1.0 - u[0] - u[1]
        lam_u = 2.0 * u[0] - 2.0 * w
        lam_v = a + 2.0 * (1.0 - a) * u[1] - 2.0 * w
        g11 = 2.0 * u[0] / lam - u[0] ** 2 * lam_u / lam**2
        g12 = -u[0] ** 2 * lam_v / lam**2
        g21 = -u[1] ** 2 * lam_u / lam**2
        g22 = 2.0 * u[1] / lam - u[1] ** 2 * lam_v / lam**2
        return np.where(bad, 0.0, np.array([[g11, g12], [g21, g22]]))


def riemann_initial(x):
    x = np.asarray(x, dtype=float)
    left = x <= 0.0
    return np.stack([np.where(left, 0.1, 0.0), np.where(left, 0.9, 0.0)])


def riemann_setup(flux):
    """Riemann experiment with the quadratic or the fractional flux."""
    if flux == "quadratic":
        G, dG, name = quadratic_flux, quadratic_flux_jacobian, "riemann-quad"
    elif flux == "fractional":
        frac = FractionalFlux()
        G, dG, name = frac, frac.jacobian, "riemann-fractional"
    else:
        raise ConfigurationError(f"unknown Riemann flux {flux!r}; expected 'quadratic' or 'fractional'")
    return SystemDef(
        d=2,
        A=riemann_A,
        B=lambda u: np.zeros((2, 2) + np.shape(u)[1:]),
        G=G,
        dG=dG,
        u0=riemann_initial,
        domain=RIEMANN_DOMAIN,
        name=name,
    )


# Registry.


@dataclass(frozen=True)
class Problem:
    """A registered problem: its system and, if known, its exact solution.

    ``exact(x, t)`` takes physical coordinates and returns shape ``(d, M)``.
    """

    name: str
    system: SystemDef
    exact: Optional[Callable] = None
    exact_t: Optional[Callable] = None
    notes: str = ""
    defaults: dict = field(default_factory=dict)


def _series_exact(kind):
    sol = series_solution(kind)
    return lambda x, t: sol.evaluate(x, t)


def _build(name):
    if name == "p1a":
        sys_ = _p1_system("p1a", constant_matrix_field(P1_A), constant_matrix_field(P1_B), p1a_source, True)
        return Problem(name, sys_, p1_exact, p1_time_derivative, "constant A and B, quadratic flux",
                       {"N": 64, "T": 1.0})
    if name == "p1b":
        sys_ = _p1_system("p1b", p1b_A, p1b_B, p1b_source, False)
        return Problem(name, sys_, p1_exact, p1_time_derivative, "state-dependent A and B, quadratic flux",
                       {"N": 64, "T": 1.0})
    if name in ("p2-square", "p2-hat"):
        kind = name.split("-")[1]
        return Problem(name, _p2_system(kind), _series_exact(kind), None,
                       f"linear system, {kind} initial data, series reference solution", {"T": 1.0})
    if name == "riemann-quad":
        return Problem(name, riemann_setup("quadratic"), None, None, "Riemann data, quadratic flux",
                       {"N": 128, "T": 50.0, "dt": 0.025})
    if name == "riemann-fractional":
        return Problem(name, riemann_setup("fractional"), None, None, "Riemann data, fractional flux",
                       {"N": 128, "T": 50.0, "dt": 0.025})
    raise ConfigurationError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}")


PROBLEM_NAMES = ("p1a", "p1b", "p2-square", "p2-hat", "riemann-quad", "riemann-fractional")


def get_problem(name):
    """Look up a built-in problem by name."""
    return _build(name)
