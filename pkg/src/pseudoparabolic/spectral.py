"""Legendre polynomials, Legendre-Gauss-Lobatto quadrature and nodal calculus on [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

_NEWTON_TOL = 1e-14
_NEWTON_MAXITER = 100


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise DomainError("Legendre polynomials are evaluated on [-1, 1] only")
    return x


def legendre_table(n, x):
    """Values of L_0..L_n at ``x`` by the three-term recurrence.

    Returns an array of shape ``(n + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n + 1,) + x.shape)
    out[0] = 1.0
    if n >= 1:
        out[1] = x
    for k in range(1, n):
        out[k + 1] = ((2 * k + 1) * x * out[k] - k * out[k - 1]) / (k + 1)
    return out


def legendre_eval(k, x):
    """Evaluate the Legendre polynomial of degree ``k`` at ``x`` in [-1, 1]."""
    if int(k) != k or k < 0:
        raise DomainError(f"degree must be a non-negative integer, got {k!r}")
    x = _check_domain(x)
    val = legendre_table(int(k), x)[int(k)]
    return float(val) if val.ndim == 0 else val


def legendre_deriv(n, x):
    """Return ``(L_n(x), L_n'(x), L_n''(x))`` for |x| < 1.

    The derivatives come from the Legendre differential equation
    ``(1 - x^2) L'' = 2 x L' - n (n + 1) L`` and the identity
    ``(1 - x^2) L_n' = n (L_{n-1} - x L_n)``; both are singular at the
    endpoints, so callers keep ``x`` strictly inside.
    """
    x = np.asarray(x, dtype=float)
    table = legendre_table(n, x)
    ln, lnm1 = table[n], table[n - 1]
    one_m_x2 = 1.0 - x * x
    d1 = n * (lnm1 - x * ln) / one_m_x2
    d2 = (2.0 * x * d1 - n * (n + 1) * ln) / one_m_x2
    return ln, d1, d2


def _lgl_nodes(n):
    # Chebyshev-Gauss-Lobatto guesses, ascending; Newton on L_n' for the interior.
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    inner = x[1:-1].copy()
    for it in range(_NEWTON_MAXITER):
        _, d1, d2 = legendre_deriv(n, inner)
        step = d1 / d2
        inner -= step
        if np.max(np.abs(step), initial=0.0) <= _NEWTON_TOL:
            break
    else:
        bad = int(np.argmax(np.abs(step))) + 1
        raise ConvergenceError(
            f"LGL Newton iteration for N={n} did not converge at node index {bad}",
            residual=float(np.max(np.abs(step))),
            iterations=_NEWTON_MAXITER,
        )
    x[1:-1] = inner
    # Symmetrize: the exact node set is symmetric about 0.
    x = 0.5 * (x - x[::-1])
    return x


def _diff_matrix(x, ln):
    n1 = len(x)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    d = (ln[:, None] / ln[None, :]) / dx
    np.fill_diagonal(d, 0.0)
    # Negative-sum diagonal keeps D applied to constants at round-off level.
    d[np.arange(n1), np.arange(n1)] = -d.sum(axis=1)
    return d


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """LGL nodes and weights of degree ``N`` with the collocation derivative matrices.

    ``nodes`` ascend from -1 to 1; ``D1[i, j] = psi_j'(x_i)`` for the nodal
    Lagrange basis and ``D2 = D1 @ D1``. All arrays are read-only so a grid
    can be shared between workers.
    """

    N: int
    nodes: np.ndarray
    weights: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    LN: np.ndarray

    @property
    def interior(self):
        return slice(1, self.N)

    @property
    def n_interior(self):
        return self.N - 1

    @property
    def D1_interior(self):
        """First-derivative matrix with boundary rows and columns removed."""
        return self.D1[1:-1, 1:-1]

    @property
    def D2_interior(self):
        return self.D2[1:-1, 1:-1]

    def quad(self, values):
        """LGL quadrature of nodal ``values`` (last axis runs over nodes)."""
        return np.asarray(values, dtype=float) @ self.weights

    def __repr__(self):
        return f"SpectralGrid(N={self.N})"


@lru_cache(maxsize=64)
def build_grid(N):
    """Build the Legendre-Gauss-Lobatto grid of polynomial degree ``N``.

    Weights follow ``w_j = 2 / (N (N + 1) L_N(x_j)^2)``. Grids are cached,
    which is safe because they are immutable.
    """
    if int(N) != N or N < 2:
        raise DomainError(f"polynomial degree must be an integer >= 2, got {N!r}")
    N = int(N)
    x = _lgl_nodes(N)
    ln = legendre_table(N, x)[N]
    w = 2.0 / (N * (N + 1) * ln**2)
    d1 = _diff_matrix(x, ln)
    return SpectralGrid(
        N=N,
        nodes=_frozen(x),
        weights=_frozen(w),
        D1=_frozen(d1),
        D2=_frozen(d1 @ d1),
        LN=_frozen(ln),
    )


def _nearest_node(grid, x, tol=1e-14):
    k = int(np.argmin(np.abs(grid.nodes - x)))
    return k if abs(grid.nodes[k] - x) <= tol else None


def nodal_basis(grid, j, x):
    """Evaluate the LGL cardinal function psi_j at a scalar ``x``.

    Uses ``psi_j(x) = (1 - x^2) L_N'(x) / (N (N + 1) (x_j - x) L_N(x_j))``.
    """
    _check_index(grid, j)
    x = float(_check_domain(x))
    k = _nearest_node(grid, x)
    if k is not None:
        return 1.0 if k == j else 0.0
    N = grid.N
    ln, d1, _ = legendre_deriv(N, x)
    return float((1.0 - x * x) * d1 / (N * (N + 1) * (grid.nodes[j] - x) * grid.LN[j]))


def nodal_basis_deriv(grid, j, x):
    """Derivative of psi_j at a scalar ``x``.

    Away from the nodes this differentiates the closed form with
    ``((1 - x^2) L_N')' = -N (N + 1) L_N``; at a node it returns the matching
    entry of ``D1``.
    """
    _check_index(grid, j)
    x = float(_check_domain(x))
    k = _nearest_node(grid, x)
    if k is not None:
        return float(grid.D1[k, j])
    N = grid.N
    ln, d1, _ = legendre_deriv(N, x)
    c = N * (N + 1) * grid.LN[j]
    r = grid.nodes[j] - x
    q = (1.0 - x * x) * d1
    return float((-N * (N + 1) * ln * r + q) / (c * r * r))


def _check_index(grid, j):
    if not 0 <= j <= grid.N:
        raise IndexError(f"node index {j} out of range 0..{grid.N}")


def project_L2(grid, samples):
    """Discrete Legendre coefficients of nodal ``samples``.

    ``coeffs[k] = (u, L_k) / |L_k|^2`` with the inner product replaced by
    LGL quadrature and the exact norm ``|L_k|^2 = 2 / (2k + 1)``. Exact on
    nodal data of polynomials of degree <= N - 1; the degree-N coefficient
    is aliased because the quadrature is not exact for ``L_N^2``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[-1] != grid.N + 1:
        raise ValueError(f"expected {grid.N + 1} nodal samples, got {samples.shape[-1]}")
    vand = legendre_table(grid.N, grid.nodes)  # (N+1 modes, N+1 nodes)
    k = np.arange(grid.N + 1)
    return (samples * grid.weights) @ vand.T * (2 * k + 1) / 2.0


def evaluate_modal(coeffs, x):
    """Evaluate a Legendre series with coefficients ``coeffs`` at points ``x``."""
    coeffs = np.asarray(coeffs, dtype=float)
    table = legendre_table(len(coeffs) - 1, _check_domain(x))
    return np.tensordot(coeffs, table, axes=(0, 0))


def interpolate(grid, values, x):
    """Evaluate the degree-N interpolant of nodal ``values`` at points ``x``.

    Barycentric formula, exact at the nodes. ``values`` may carry leading
    component axes; the result has shape ``values.shape[:-1] + (len(x),)``.
    """
    values = np.asarray(values, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - grid.nodes[None, :]
    hit = np.abs(diff) < 1e-15
    diff[hit] = 1.0
    # Barycentric weights of LGL points are proportional to 1 / L_N(x_j).
    kern = (1.0 / grid.LN) / diff
    on_node = hit.any(axis=1)
    kern[on_node] = hit[on_node]
    kern /= kern.sum(axis=1, keepdims=True)
    return values @ kern.T
