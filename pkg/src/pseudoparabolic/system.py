"""Continuous problem data: coefficients, boundary and initial data, domain mapping.

All coefficient callables are vectorized over sample points. With ``d``
unknowns and ``M`` points, a state batch ``u`` has shape ``(d, M)`` and

* ``A(u)``, ``B(u)``, ``dG(u)`` return ``(d, d, M)``,
* ``G(u)`` returns ``(d, M)``,
* ``gamma(u, x, t)`` returns ``(d, M)`` (``x`` has shape ``(M,)``),
* ``gL(t)``, ``gR(t)`` return ``(d,)`` and ``u0(x)`` returns ``(d, M)``.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError

Array = np.ndarray


def zero_matrix_field(d):
    def coeff(u):
        return np.zeros((d, d) + np.shape(u)[1:])
    return coeff


def constant_matrix_field(matrix):
    matrix = np.asarray(matrix, dtype=float)

    def coeff(u):
        m = np.shape(u)[1:]
        return np.broadcast_to(matrix.reshape(matrix.shape + (1,) * len(m)), matrix.shape + m).copy()
    return coeff


def zero_vector_field(d):
    def field(u, *args):
        return np.zeros((d,) + np.shape(u)[1:])
    return field


def constant_boundary(value):
    value = np.asarray(value, dtype=float)

    def g(t):
        return value.copy()
    return g


def fd_jacobian(G, d, rel_step=1e-6):
    """Central-difference Jacobian of a vectorized flux ``G``.

    The step for component ``q`` is ``rel_step * (1 + |u_q|)`` pointwise.
    """
    def dG(u):
        u = np.asarray(u, dtype=float)
        out = np.empty((d, d) + u.shape[1:])
        for q in range(d):
            h = rel_step * (1.0 + np.abs(u[q]))
            up = u.copy()
            um = u.copy()
            up[q] += h
            um[q] -= h
            out[:, q] = (G(up) - G(um)) / (2.0 * h)
        return out
    return dG


@dataclass(frozen=True)
class SystemDef:
    """A Dirichlet problem ``(I - (A u_x)_x) u_t = -(B u_x)_x + G(u)_x + gamma``.

    ``dG`` may be omitted; a finite-difference Jacobian is substituted.
    ``constant_A`` marks ``A`` as state independent so the mass-side matrix
    is assembled and factorized once per stage; ``linear`` additionally
    marks ``B`` and ``G'`` as state independent.
    """

    d: int
    A: Callable[[Array], Array]
    B: Callable[[Array], Array]
    G: Callable[[Array], Array]
    u0: Callable[[Array], Array]
    domain: tuple = (-1.0, 1.0)
    dG: Optional[Callable[[Array], Array]] = None
    gamma: Optional[Callable[[Array, Array, float], Array]] = None
    gL: Optional[Callable[[float], Array]] = None
    gR: Optional[Callable[[float], Array]] = None
    dgL: Optional[Callable[[float], Array]] = None
    dgR: Optional[Callable[[float], Array]] = None
    constant_A: bool = False
    linear: bool = False
    name: str = "custom"

    def __post_init__(self):
        if self.d < 1:
            raise ConfigurationError(f"number of unknowns must be >= 1, got {self.d}")
        xl, xr = self.domain
        if not xl < xr:
            raise ConfigurationError(f"domain must satisfy xL < xR, got {self.domain}")
        set_ = object.__setattr__
        set_(self, "domain", (float(xl), float(xr)))
        if self.dG is None:
            set_(self, "dG", fd_jacobian(self.G, self.d))
        if self.gamma is None:
            set_(self, "gamma", zero_vector_field(self.d))
        zero = np.zeros(self.d)
        if self.gL is None:
            set_(self, "gL", constant_boundary(zero))
            set_(self, "dgL", constant_boundary(zero))
        if self.gR is None:
            set_(self, "gR", constant_boundary(zero))
            set_(self, "dgR", constant_boundary(zero))
        if self.dgL is None:
            set_(self, "dgL", _fd_time_derivative(self.gL))
        if self.dgR is None:
            set_(self, "dgR", _fd_time_derivative(self.gR))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _fd_time_derivative(g, h=1e-6):
    def dg(t):
        return (np.asarray(g(t + h)) - np.asarray(g(t - h))) / (2.0 * h)
    return dg


@dataclass(frozen=True)
class HomogenizedSystem:
    """The problem rewritten for ``v = u - lift`` on the reference interval.

    Coefficients are stored in reference coordinates ``xi in [-1, 1]``:
    with ``s = 2 / (xR - xL)`` the matrices ``A`` and ``B`` pick up ``s^2``
    and the flux ``G`` (with its Jacobian) picks up ``s``. They are always
    evaluated at the full state ``u = v + lift``. The affine lift carries the
    Dirichlet data, so ``v`` vanishes at both ends; its contributions enter
    the discrete load vector during assembly (see ``assembly``).
    """

    system: SystemDef
    scale: float
    center: float

    @property
    def d(self):
        return self.system.d

    def to_physical(self, xi):
        return self.center + np.asarray(xi, dtype=float) / self.scale

    def to_reference(self, x):
        return (np.asarray(x, dtype=float) - self.center) * self.scale

    def lift(self, xi, t):
        """Affine interpolant of the boundary data, shape ``(d, M)``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        gl = np.asarray(self.system.gL(t), dtype=float)[:, None]
        gr = np.asarray(self.system.gR(t), dtype=float)[:, None]
        return 0.5 * (gr - gl) * xi + 0.5 * (gr + gl)

    def lift_t(self, xi, t):
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        gl = np.asarray(self.system.dgL(t), dtype=float)[:, None]
        gr = np.asarray(self.system.dgR(t), dtype=float)[:, None]
        return 0.5 * (gr - gl) * xi + 0.5 * (gr + gl)

    def lift_slope(self, t):
        """``d lift / d xi``, constant in space, shape ``(d,)``."""
        return 0.5 * (np.asarray(self.system.gR(t)) - np.asarray(self.system.gL(t)))

    def recover(self, v, xi, t):
        return np.asarray(v, dtype=float) + self.lift(xi, t)

    def homogeneous_part(self, u, xi, t):
        return np.asarray(u, dtype=float) - self.lift(xi, t)

    def A(self, u):
        return self.scale**2 * self.system.A(u)

    def B(self, u):
        return self.scale**2 * self.system.B(u)

    def G(self, u):
        return self.scale * self.system.G(u)

    def dG(self, u):
        return self.scale * self.system.dG(u)

    def gamma(self, u, xi, t):
        return self.system.gamma(u, self.to_physical(xi), t)

    def initial(self, xi):
        """Initial data of ``v`` sampled at reference points ``xi``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        u0 = np.asarray(self.system.u0(self.to_physical(xi)), dtype=float).reshape(self.d, -1)
        return u0 - self.lift(xi, 0.0)


def homogenize(system):
    """Map ``system`` to ``[-1, 1]`` and subtract the affine boundary lift."""
    xl, xr = system.domain
    return HomogenizedSystem(system=system, scale=2.0 / (xr - xl), center=0.5 * (xl + xr))


def _d_dx(f, x, h):
    # Fourth-order central difference.
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h)


def manufacture_source(system, exact, h_x=None, h_t=1e-3):
    """Return ``system`` with ``gamma`` chosen so that ``exact(x, t)`` solves it.

    ``gamma = (I - (A w_x)_x) w + (B u_x)_x - G(u)_x`` with ``w = u_t``,
    all derivatives by fourth-order central differences. ``exact`` is
    vectorized: ``exact(x, t)`` returns shape ``(d, M)``. The source ignores
    its state argument, so it is exact only along the manufactured solution.
    """
    xl, xr = system.domain
    hx = h_x if h_x is not None else 1e-3 * (xr - xl) / 2.0
    A, B, G = system.A, system.B, system.G

    def u_t(x, t):
        return _d_dx(lambda s: exact(x, s), t, h_t)

    def gamma(u, x, t):
        x = np.atleast_1d(np.asarray(x, dtype=float))

        def a_flux(y):
            w_x = _d_dx(lambda z: u_t(z, t), y, hx)
            return np.einsum("pqm,qm->pm", A(exact(y, t)), w_x)

        def b_flux(y):
            u_x = _d_dx(lambda z: exact(z, t), y, hx)
            return np.einsum("pqm,qm->pm", B(exact(y, t)), u_x)

        def g_flux(y):
            return G(exact(y, t))

        return (
            u_t(x, t)
            - _d_dx(a_flux, x, hx)
            + _d_dx(b_flux, x, hx)
            - _d_dx(g_flux, x, hx)
        )

    return system.replace(gamma=gamma)


def check_positive_definite(system, n_samples=201, t=0.0):
    """Sample ``A`` along the initial data and warn if it is not positive definite.

    Returns the smallest eigenvalue of the symmetric part of ``A`` over the
    samples. Violations only warn: some benchmark problems run outside the
    uniform ellipticity assumption on purpose.
    """
    xl, xr = system.domain
    x = np.linspace(xl, xr, n_samples)
    u = np.asarray(system.u0(x), dtype=float).reshape(system.d, -1)
    a = np.asarray(system.A(u), dtype=float)
    sym = 0.5 * (a + np.swapaxes(a, 0, 1))
    lam_min = float(np.min(np.linalg.eigvalsh(np.moveaxis(sym, -1, 0))))
    if lam_min <= 0.0:
        warnings.warn(
            f"A(u) is not positive definite along the initial data of {system.name!r} "
            f"(smallest eigenvalue {lam_min:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return lam_min


def check_boundary_data(system, T, n_samples=101, tol=1e-3):
    """Warn if the Dirichlet data do not look continuously differentiable on [0, T].

    Difference quotients spanning the sample spacing are compared: centered
    ones at two step sizes and second-order one-sided ones from each side. A
    jump in the data or its derivative anywhere in [0, T] shows up as a mismatch.
    """
    ok = True
    h = T / (n_samples - 1) if T > 0 else 1e-3
    for side, g in (("left", system.gL), ("right", system.gR)):
        for t in np.linspace(0.0, T, n_samples):
            v = {k: np.asarray(g(t + k * h / 2), dtype=float) for k in (-4, -2, -1, 0, 1, 2, 4)}
            c1 = (v[2] - v[-2]) / (2 * h)
            c2 = (v[1] - v[-1]) / h
            fwd = (-3 * v[0] + 4 * v[2] - v[4]) / (2 * h)
            bwd = (3 * v[0] - 4 * v[-2] + v[-4]) / (2 * h)
            scale = 1 + np.max(np.abs(np.concatenate([c1, fwd, bwd])))
            if not all(np.all(np.isfinite(q)) for q in (c1, fwd, bwd)) \
                    or max(np.max(np.abs(c1 - c2)), np.max(np.abs(fwd - bwd))) > tol * scale:
                warnings.warn(f"{side} boundary data of {system.name!r} look non-smooth near t={t:g}",
                              RuntimeWarning, stacklevel=2)
                ok = False
                break
    return ok
