"""Two-stage SSP-SDIRK time stepping with fixed-point stage solves.

A problem handed to the integrator needs ``rhs(U, t) -> (K, F)`` (so that
``K dU/dt = F``), a ``constant_K`` flag and the block count ``d``.
:class:`~pseudoparabolic.assembly.SemiDiscretization` provides these;
:class:`ExplicitODE` wraps a plain ``y' = f(t, y)`` for testing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .assembly import State, _check_pivots, lu_factor
from .errors import ConfigurationError, ConvergenceError



@dataclass(frozen=True)
class SdirkScheme:
    """Two-stage SDIRK with tableau ``a = [[mu, 0], [1 - 2 mu, mu]]``, ``b = [1/2, 1/2]``."""

    mu: float
    order: int
    name: str

    @property
    def a(self):
        mu = self.mu
        return np.array([[mu, 0.0], [1.0 - 2.0 * mu, mu]])

    @property
    def b(self):
        return np.array([0.5, 0.5])

    @property
    def c(self):
        return np.array([self.mu, 1.0 - self.mu])

    def stability_function(self, z):
        """``R(z) = 1 + z b^T (I - z a)^{-1} 1`` for scalar or array ``z``."""
        z = np.asarray(z, dtype=complex)
        mu = self.mu
        # (I - z a) is lower triangular; solve by forward substitution.
        k1 = 1.0 / (1.0 - mu * z)
        k2 = (1.0 + (1.0 - 2.0 * mu) * z * k1) / (1.0 - mu * z)
        return 1.0 + z * 0.5 * (k1 + k2)


SSP22 = SdirkScheme(mu=0.5, order=2, name="ssp22")
SSP23 = SdirkScheme(mu=(3.0 + math.sqrt(3.0)) / 6.0, order=3, name="ssp23")
SCHEMES = {"ssp22": SSP22, "ssp23": SSP23}


def get_scheme(name):
    try:
        return SCHEMES[name]
    except KeyError:
        raise ConfigurationError(f"unknown scheme {name!r}; expected one of {sorted(SCHEMES)}") from None


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    T: float
    fp_tol: float = 1e-10
    fp_max_iters: int = 50
    reassemble: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        if self.T < self.dt and self.T != 0:
            raise ConfigurationError(f"final time {self.T} is shorter than the time step {self.dt}")
        if not self.fp_tol > 0:
            raise ConfigurationError("fixed-point tolerance must be positive")
        if self.fp_max_iters < 1:
            raise ConfigurationError("fp_max_iters must be >= 1")

    def time_levels(self):
        """Step sizes covering [0, T]; the last one absorbs a non-integer ratio."""
        if self.T == 0:
            return []
        n = max(1, int(math.ceil(self.T / self.dt - 1e-9)))
        steps = [self.dt] * n
        steps[-1] = self.T - self.dt * (n - 1)
        return steps


class BlockLU:
    """Factorization of ``K`` exploiting its ``d x d`` block structure.

    For ``d = 2`` the leading block ``K11`` is factorized, ``K11 Kt = K12``
    is solved, and the Schur complement ``K22 - K21 Kt`` gets its own LU
    factorization. Other block counts fall back to a dense LU of ``K``.
    """

    def __init__(self, K, d=2):
        K = np.asarray(K, dtype=float)
        self.d = d
        self.shape = K.shape
        if d == 2 and K.shape[0] % 2 == 0:
            n = K.shape[0] // 2
            K11, K12, K21, K22 = K[:n, :n], K[:n, n:], K[n:, :n], K[n:, n:]
            self._lu11 = lu_factor(K11)
            _check_pivots(self._lu11[0], K11, "K11")
            self._Kt = sla.lu_solve(self._lu11, K12)
            self._K21 = K21
            schur = K22 - K21 @ self._Kt
            self._lus = lu_factor(schur)
            _check_pivots(self._lus[0], K22 if np.any(K22) else schur, "schur")
            self._n = n
            self.blocked = True
        else:
            self._lu = lu_factor(K)
            _check_pivots(self._lu[0], K, "K")
            self.blocked = False

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if not self.blocked:
            return sla.lu_solve(self._lu, rhs)
        n = self._n
        y1 = sla.lu_solve(self._lu11, rhs[:n])
        x2 = sla.lu_solve(self._lus, rhs[n:] - self._K21 @ y1)
        x1 = y1 - self._Kt @ x2
        return np.concatenate([x1, x2])


def block_lu_solve(K, rhs, d=2):
    """Solve ``K X = rhs`` with the block elimination for ``d = 2``."""
    return BlockLU(K, d).solve(rhs)


class ExplicitODE:
    """Adapter presenting ``y' = f(t, y)`` as ``I y' = f`` to the integrator."""

    constant_K = True

    def __init__(self, f, size=1):
        self.f = f
        self.d = 1
        self.size = size
        self._eye = np.eye(size)

    def rhs(self, U, t):
        return self._eye, np.atleast_1d(np.asarray(self.f(t, np.ravel(U)), dtype=float))


@dataclass
class RunStats:
    """Counters of a run; ``history`` holds the max-norm update of every fixed-point sweep."""

    steps: int = 0
    fp_iters: int = 0
    factorizations: int = 0
    history: list = field(default_factory=list)


class _Factorizer:
    def __init__(self, problem, stats):
        self.problem = problem
        self.stats = stats
        self._cached = None

    def factor(self, K):
        if getattr(self.problem, "constant_K", False):
            if self._cached is None:
                self._cached = self._new(K)
            return self._cached
        return self._new(K)

    def _new(self, K):
        self.stats.factorizations += 1
        return BlockLU(K, getattr(self.problem, "d", 1))


def fixed_point_solve(base, scheme, problem, dt, t, config, factorizer=None, stats=None):
    """Solve ``u = base + mu dt K(u)^{-1} F(u)`` by fixed-point iteration.

    Each sweep solves ``K(u_nu) X = mu dt F(u_nu)`` and sets
    ``u_{nu+1} = X + base``, starting from ``u_0 = base``. Returns the stage
    value and ``X / (mu dt)``, the stage derivative consistent with it.
    """
    stats = stats if stats is not None else RunStats()
    factorizer = factorizer or _Factorizer(problem, stats)
    h = scheme.mu * dt
    u = np.array(base, dtype=float)
    upd = np.inf
    for it in range(1, config.fp_max_iters + 1):
        K, F = problem.rhs(u, t)
        if not np.all(np.isfinite(F)):
            raise ConvergenceError(
                f"fixed-point iteration produced non-finite values at t={t:.6g}; reduce dt",
                residual=np.inf, iterations=it)
        X = factorizer.factor(K).solve(h * F)
        new = X + base
        upd = float(np.max(np.abs(new - u)))
        u = new
        stats.fp_iters += 1
        stats.history.append(upd)
        if not np.isfinite(upd):
            raise ConvergenceError(
                f"fixed-point iteration produced non-finite values at t={t:.6g}; reduce dt",
                residual=upd, iterations=it)
        if upd <= config.fp_tol:
            return u, X / h
    raise ConvergenceError(
        f"fixed-point iteration did not converge in {config.fp_max_iters} sweeps at t={t:.6g} "
        f"(last update {upd:.3e}); try a smaller dt",
        residual=upd, iterations=config.fp_max_iters)


def sdirk_step(scheme, problem, state, dt, config, factorizer=None, stats=None):
    """Advance ``state`` by one step of size ``dt``."""
    stats = stats if stats is not None else RunStats()
    factorizer = factorizer or _Factorizer(problem, stats)
    mu = scheme.mu
    un = np.ravel(np.asarray(state.U, dtype=float))
    t = state.t
    _, k1 = fixed_point_solve(un, scheme, problem, dt, t + mu * dt, config, factorizer, stats)
    base2 = un + (1.0 - 2.0 * mu) * dt * k1
    _, k2 = fixed_point_solve(base2, scheme, problem, dt, t + (1.0 - mu) * dt, config, factorizer, stats)
    unew = un + 0.5 * dt * (k1 + k2)
    stats.steps += 1
    return State(t=t + dt, U=unew.reshape(np.shape(state.U)))


def integrate(problem, scheme, config, state=None, snapshots=(), on_snapshot=None):
    """Integrate from ``state`` (default: the problem's initial state) to ``config.T``.

    ``snapshots`` lists times at which ``on_snapshot(state)`` is called; the
    nearest time level is used. Returns ``(final_state, stats)``.
    """
    stats = RunStats()
    factorizer = _Factorizer(problem, stats)
    state = state if state is not None else problem.initial_state()
    pending = sorted(float(s) for s in snapshots)
    while pending and pending[0] <= state.t + 1e-12:
        on_snapshot(state)
        pending.pop(0)
    for dt in config.time_levels():
        state = sdirk_step(scheme, problem, state, dt, config, factorizer, stats)
        if not np.all(np.isfinite(state.U)):
            raise ConvergenceError(f"solution became non-finite at t={state.t:.6g}")
        while pending and pending[0] <= state.t + 0.5 * config.dt:
            on_snapshot(state)
            pending.pop(0)
    return state, stats


def ssp_max_dt(grid, eps, delta, lip, dt_max=1e6, tol=1e-12):
    """Largest forward-Euler step satisfying the strong-stability bound.

    Finds the largest ``dt`` with
    ``phi(dt) = ||I + eps dt C^{-1} D2|| + dt lip ||C^{-1} D1|| <= 1``, where
    ``C = I - delta D2`` and ``D1``, ``D2`` are the interior LGL derivative
    matrices, in the induced 2-norm. Returns ``dt_max`` when the bound holds
    for every step and 0 (with a warning) when it holds for none.

    ``phi`` is convex with ``phi(0) = 1``, so the admissible steps form an
    interval ``[0, dt*]``; it is nontrivial exactly when the slope of ``phi``
    at 0, ``eps lambda_max(sym(C^{-1} D2)) + lip ||C^{-1} D1||``, is negative.
    """
    n = grid.N - 1
    C = np.eye(n) - delta * grid.D2_interior
    M2 = np.linalg.solve(C, grid.D2_interior)
    t1 = np.linalg.norm(np.linalg.solve(C, grid.D1_interior), 2)
    eye = np.eye(n)

    def phi(dt):
        return np.linalg.norm(eye + eps * dt * M2, 2) + dt * lip * t1

    if phi(dt_max) <= 1.0:
        return dt_max
    slope = eps * np.max(np.linalg.eigvalsh(0.5 * (M2 + M2.T))) + lip * t1
    if slope >= 0.0:
        warnings.warn("no positive step satisfies the SSP bound", RuntimeWarning, stacklevel=2)
        return 0.0
    hi = dt_max
    lo = dt_max
    while phi(lo) > 1.0:
        hi = lo
        lo *= 0.5
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if phi(mid) <= 1.0:
            lo = mid
        else:
            hi = mid
    return lo
