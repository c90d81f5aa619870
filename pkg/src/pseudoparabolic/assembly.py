"""G-NI assembly of the semidiscrete system ``K(u) dU/dt = L(u) U + H(u)``.

Unknowns are the interior nodal values ``U[p, k] = v_p(x_k)``, ``k = 1..N-1``,
stacked component-major: entry ``p * (N - 1) + k - 1``. The ``d x d`` block
structure of every matrix follows the components.

Sign conventions, fixed by the manufactured-solution residual: testing the
equation with ``psi_j`` and integrating the ``A`` and ``B`` terms by parts
gives ``K = K0 + K2(A)`` and ``L = K2(B) + K1(G)`` with plus signs on every
block, because ``-(B u_x)_x`` turns into ``+(B u_x, psi_x)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SingularMatrixError
from .system import HomogenizedSystem, SystemDef, homogenize


@dataclass(frozen=True)
class State:
    """Interior nodal values ``U`` (shape ``(d, N - 1)``) at time ``t``."""

    t: float
    U: np.ndarray

    def flat(self):
        return np.asarray(self.U, dtype=float).ravel()


@dataclass(frozen=True)
class AssembledOperators:
    K0: np.ndarray
    K2A: np.ndarray
    K2B: np.ndarray
    K1G: np.ndarray
    H: np.ndarray

    @property
    def K(self):
        return self.K0 + self.K2A

    @property
    def L(self):
        return self.K2B + self.K1G


def full_nodal(grid, u):
    """Values at all ``N + 1`` nodes; interior-only input gets zero boundaries."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[-1] == grid.N + 1:
        return u
    if u.shape[-1] != grid.N - 1:
        raise ValueError(f"state has {u.shape[-1]} nodal values, expected {grid.N - 1} or {grid.N + 1}")
    out = np.zeros(u.shape[:-1] + (grid.N + 1,))
    out[..., 1:-1] = u
    return out


def _blocks_to_matrix(blocks):
    d = blocks.shape[0]
    n = blocks.shape[2]
    return blocks.transpose(0, 2, 1, 3).reshape(d * n, d * blocks.shape[3])


def assemble_K0(grid, d):
    return np.diag(np.tile(grid.weights[1:-1], d))


def assemble_K2(grid, coeff, u):
    """Stiffness blocks ``sum_h c_pq(u_h) psi_j'(x_h) psi_k'(x_h) w_h``.

    The sum runs over all ``N + 1`` nodes; ``u`` holds the state there
    (an interior-only state is padded with zeros).
    """
    u = full_nodal(grid, u)
    c = np.asarray(coeff(u), dtype=float)
    d = c.shape[0]
    dint = grid.D1[:, 1:-1]
    wc = c * grid.weights
    n = grid.N - 1
    blocks = np.empty((d, d, n, n))
    for p in range(d):
        for q in range(d):
            blocks[p, q] = (dint.T * wc[p, q]) @ dint
    return _blocks_to_matrix(blocks)


def assemble_K1(grid, dG, u):
    """Transport blocks ``g_pq(u_j) psi_k'(x_j) w_j`` with ``g = G'``."""
    u = full_nodal(grid, u)
    g = np.asarray(dG(u[:, 1:-1]), dtype=float)
    d = g.shape[0]
    dint = grid.D1[1:-1, 1:-1]
    wg = g * grid.weights[1:-1]
    blocks = wg[:, :, :, None] * dint[None, None]
    return _blocks_to_matrix(blocks.reshape(d, d, grid.N - 1, grid.N - 1))


def assemble_H(grid, gamma, u, t=0.0, xi=None):
    """Stacked load vector with entries ``w_j gamma_p(u_j, x_j, t)``."""
    u = full_nodal(grid, u)
    xi = grid.nodes[1:-1] if xi is None else xi
    gam = np.asarray(gamma(u[:, 1:-1], xi, t), dtype=float)
    return (gam * grid.weights[1:-1]).ravel()


def _stiffness_apply(grid, c, z):
    # Rows of K2 for interior test functions applied to full nodal data z.
    flux = np.einsum("pqh,qh->ph", c, z @ grid.D1.T) * grid.weights
    return flux @ grid.D1[:, 1:-1]


def _transport_apply(grid, g_int, z):
    dz = z @ grid.D1[1:-1, :].T
    return np.einsum("pqj,qj->pj", g_int, dz) * grid.weights[1:-1]


class SemiDiscretization:
    """The G-NI semidiscrete system of a problem on a given LGL grid.

    Works with the homogenized unknown ``v = u - lift``. Coefficients are
    evaluated at the full state ``u = v + lift`` at every node, boundary
    nodes included; lift terms go into the load vector.
    """

    def __init__(self, problem, grid):
        self.hsys = problem if isinstance(problem, HomogenizedSystem) else homogenize(problem)
        self.grid = grid
        self.d = self.hsys.d
        self.n = grid.N - 1
        self.K0 = assemble_K0(grid, self.d)
        self._const_K = None
        self._const_L = None

    @property
    def system(self) -> SystemDef:
        return self.hsys.system

    @property
    def constant_K(self):
        return self.system.constant_A or self.system.linear

    @property
    def size(self):
        return self.d * self.n

    def initial_state(self):
        """Nodal interpolation of the initial data."""
        v0 = self.hsys.initial(self.grid.nodes)
        return State(t=0.0, U=v0[:, 1:-1].copy())

    def full_state(self, U, t):
        """Physical-variable nodal values ``u = v + lift`` at all nodes."""
        v = full_nodal(self.grid, np.reshape(U, (self.d, self.n)))
        return v + self.hsys.lift(self.grid.nodes, t)

    def interior_from_full(self, u, t):
        v = np.asarray(u, dtype=float) - self.hsys.lift(self.grid.nodes, t)
        return v[:, 1:-1]

    def assemble(self, U, t):
        """All G-NI operators at state ``U`` and time ``t``."""
        grid, hs = self.grid, self.hsys
        u = self.full_state(U, t)
        K2A = self._K2A(u)
        K2B, K1G = self._L_parts(u)
        H = assemble_H(grid, hs.gamma, u, t) + self._lift_load(u, t)
        return AssembledOperators(K0=self.K0, K2A=K2A, K2B=K2B, K1G=K1G, H=H)

    def _K2A(self, u):
        if self.constant_K:
            if self._const_K is None:
                self._const_K = assemble_K2(self.grid, self.hsys.A, u)
            return self._const_K
        return assemble_K2(self.grid, self.hsys.A, u)

    def _L_parts(self, u):
        if self.system.linear:
            if self._const_L is None:
                self._const_L = (assemble_K2(self.grid, self.hsys.B, u),
                                 assemble_K1(self.grid, self.hsys.dG, u))
            return self._const_L
        return assemble_K2(self.grid, self.hsys.B, u), assemble_K1(self.grid, self.hsys.dG, u)

    def _lift_load(self, u, t):
        grid, hs = self.grid, self.hsys
        nodes = grid.nodes
        lift = hs.lift(nodes, t)
        lift_t = hs.lift_t(nodes, t)
        if not (np.any(lift) or np.any(lift_t)):
            return np.zeros(self.size)
        load = _stiffness_apply(grid, hs.B(u), lift)
        load += _transport_apply(grid, hs.dG(u[:, 1:-1]), lift)
        if np.any(lift_t):
            load -= lift_t[:, 1:-1] * grid.weights[1:-1]
            load -= _stiffness_apply(grid, hs.A(u), lift_t)
        return load.ravel()

    def rhs(self, U, t):
        """Return ``(K, F)`` with ``K dU/dt = F``."""
        ops = self.assemble(U, t)
        return semidiscrete_rhs(ops, U)

    def time_derivative(self, U, t):
        K, F = self.rhs(U, t)
        return solve_dense(K, F)

    def residual(self, U, dUdt, t):
        """``K dU/dt - F`` for given nodal values and time derivative."""
        K, F = self.rhs(U, t)
        return K @ np.ravel(dUdt) - F


def semidiscrete_rhs(ops, U):
    """``(K, F)`` with ``K = K0 + K2(A)`` and ``F = (K2(B) + K1(G)) U + H``."""
    return ops.K, ops.L @ np.ravel(U) + ops.H


def solve_dense(K, rhs):
    """LU solve that reports a singular ``K`` with a condition estimate."""
    lu, piv = lu_factor(K)
    _check_pivots(lu, K, "K")
    return sla.lu_solve((lu, piv), rhs)


def lu_factor(K):
    """``scipy.linalg.lu_factor`` without its singularity warning; see :func:`_check_pivots`."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        return sla.lu_factor(K, check_finite=True)


def _check_pivots(lu, K, code):
    diag = np.abs(np.diag(lu))
    scale = np.max(np.abs(K)) if K.size else 0.0
    if scale == 0.0 or np.min(diag) <= 1e3 * np.finfo(float).eps * scale * len(diag):
        cond = np.inf if np.min(diag) == 0.0 else float(np.linalg.cond(K))
        raise SingularMatrixError(
            f"matrix {code} is singular to working precision (condition estimate {cond:.3e}); "
            "A(u) may have lost positive definiteness", code=code, condition=cond)


def manufactured_residual(problem, N, t=0.0):
    """Max-norm residual ``K dU/dt - F`` at the exact nodal values of ``problem``.

    ``problem`` needs ``exact`` and ``exact_t``. With correct assembly the
    residual decays spectrally in ``N``.
    """
    from .spectral import build_grid

    sd = SemiDiscretization(problem.system, build_grid(N))
    x = sd.hsys.to_physical(sd.grid.nodes)
    U = sd.interior_from_full(problem.exact(x, t), t)
    dU = (np.asarray(problem.exact_t(x, t)) - sd.hsys.lift_t(sd.grid.nodes, t))[:, 1:-1]
    return float(np.max(np.abs(sd.residual(U, dU, t))))
