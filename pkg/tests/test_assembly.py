import numpy as np
import pytest

from pseudoparabolic.assembly import (AssembledOperators, SemiDiscretization, assemble_H, assemble_K0, assemble_K1,
                                      assemble_K2, full_nodal, manufactured_residual, semidiscrete_rhs, solve_dense)
from pseudoparabolic.errors import SingularMatrixError
from pseudoparabolic.problems import P1_A, get_problem
from pseudoparabolic.spectral import build_grid
from pseudoparabolic.system import SystemDef, constant_matrix_field, zero_matrix_field


def _const(c):
    return constant_matrix_field(np.atleast_2d(c))


def _stiffness(N):
    g = build_grid(N)
    return g, assemble_K2(g, _const(1.0), np.zeros((1, N + 1)))


def _basis_deriv(g, j, x):
    # psi_j' is a polynomial of degree N - 1 with nodal values D1[:, j].
    return np.asarray(g.D1[:, j]) @ _lagrange_at(g, x)


def _lagrange_at(g, x):
    # Columns: all cardinal functions at x, via the barycentric interpolant.
    from pseudoparabolic.spectral import interpolate
    return interpolate(g, np.eye(g.N + 1), x)


def test_stiffness_against_dense_quadrature():
    N = 12
    g, S = _stiffness(N)
    xg, wg = np.polynomial.legendre.leggauss(2 * N)
    lhs = S @ (1 - g.nodes[1:-1] ** 2)
    rhs = np.array([np.sum(wg * _basis_deriv(g, j, xg) * (-2 * xg)) for j in range(1, N)])
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_quadrature_consistency_with_polynomial_coefficient():
    # c(u) = 1 + u with u = x: integrand degree 2N - 1 is integrated exactly.
    N = 10
    g = build_grid(N)
    K = assemble_K2(g, lambda u: (1 + u)[None], g.nodes[None])
    xg, wg = np.polynomial.legendre.leggauss(N + 2)
    dpsi = np.array([_basis_deriv(g, j, xg) for j in range(1, N)])
    ref = (dpsi * (1 + xg) * wg) @ dpsi.T
    assert np.allclose(K, ref, atol=1e-9)


def test_zero_coefficient_gives_zero():
    g = build_grid(8)
    assert not np.any(assemble_K2(g, zero_matrix_field(1), np.zeros((1, 9))))
    assert not np.any(assemble_K1(g, zero_matrix_field(1), np.zeros((1, 9))))


@pytest.mark.parametrize("N", [4, 8, 16, 32])
def test_stiffness_symmetric_positive_definite(N):
    _, S = _stiffness(N)
    assert np.allclose(S, S.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(S)) > 0


def test_block_structure_of_problem_1a_matrix():
    N = 10
    g, S = _stiffness(N)
    K2A = assemble_K2(g, _const(P1_A), np.zeros((2, N + 1)))
    n = N - 1
    assert np.allclose(K2A[:n, :n], 2 * S) and np.allclose(K2A[:n, n:], S)
    assert np.allclose(K2A[n:, :n], 0) and np.allclose(K2A[n:, n:], 2 * S)


def test_transport_matrix_formula():
    g = build_grid(9)
    K1 = assemble_K1(g, _const(1.0), np.zeros((1, 10)))
    assert np.allclose(K1, np.diag(g.weights[1:-1]) @ g.D1_interior)
    # Quadratic flux of problem 1: the Jacobian vanishes at zero.
    sys_ = get_problem("p1a").system
    assert not np.any(assemble_K1(g, sys_.dG, np.zeros((2, 10))))


def test_load_vector_examples():
    g = build_grid(8)
    zero = assemble_H(g, lambda u, x, t: np.zeros_like(u), np.zeros((1, 9)))
    assert not np.any(zero)
    ones = assemble_H(g, lambda u, x, t: np.ones_like(u), np.zeros((1, 9)))
    assert np.allclose(ones, g.weights[1:-1])
    U = np.random.default_rng(0).normal(size=(2, 7))
    H = assemble_H(g, lambda u, x, t: u, U)
    assert np.allclose(H, assemble_K0(g, 2) @ U.ravel())


def test_mass_matrix_is_positive_diagonal():
    g = build_grid(6)
    K0 = assemble_K0(g, 3)
    assert np.allclose(K0, np.diag(np.diag(K0)))
    assert np.allclose(np.diag(K0), np.tile(g.weights[1:-1], 3)) and np.all(np.diag(K0) > 0)


def test_trivial_system_has_zero_rhs():
    sys_ = SystemDef(d=1, A=zero_matrix_field(1), B=zero_matrix_field(1), G=lambda u: 0 * u,
                     u0=lambda x: np.atleast_2d(np.sin(np.pi * x)))
    sd = SemiDiscretization(sys_, build_grid(8))
    K, F = sd.rhs(sd.initial_state().U, 0.0)
    assert np.allclose(K, sd.K0) and np.allclose(F, 0.0)


def test_scalar_filter_structure():
    # After scaling by K0^{-1}: (I - delta D2) U' = eps D2 U + D1 f(U) on the interior.
    delta, eps, N = 0.3, 0.1, 12
    g = build_grid(N)
    sys_ = SystemDef(d=1, A=_const(delta), B=_const(-eps), G=lambda u: u, dG=_const(1.0),
                     u0=lambda x: np.atleast_2d(np.sin(np.pi * x)))
    sd = SemiDiscretization(sys_, g)
    U = np.random.default_rng(2).normal(size=(1, N - 1))
    K, F = sd.rhs(U, 0.0)
    W = np.diag(1 / g.weights[1:-1])
    # The G-NI stiffness equals -W D2 on interior rows (integration by parts is exact).
    assert np.allclose(W @ K, np.eye(N - 1) - delta * g.D2_interior, atol=1e-9)
    assert np.allclose(W @ F, eps * g.D2_interior @ U[0] + g.D1_interior @ U[0], atol=1e-9)


@pytest.mark.parametrize("name", ["p1a", "p1b"])
@pytest.mark.parametrize("t", [0.0, 0.7])
def test_manufactured_residual_decays(name, t):
    r = [manufactured_residual(get_problem(name), N, t) for N in (8, 16, 32)]
    assert r[1] < r[0] / 10 and r[2] < r[1] / 10
    assert r[2] < 1e-10


def test_semidiscrete_rhs_combines_blocks():
    n = 3
    rng = np.random.default_rng(4)
    ops = AssembledOperators(*(rng.normal(size=(n, n)) for _ in range(4)), H=rng.normal(size=n))
    U = rng.normal(size=n)
    K, F = semidiscrete_rhs(ops, U)
    assert np.allclose(K, ops.K0 + ops.K2A)
    assert np.allclose(F, (ops.K2B + ops.K1G) @ U + ops.H)


def test_constant_matrix_assembled_once():
    sd = SemiDiscretization(get_problem("p1a").system, build_grid(8))
    U = sd.initial_state().U
    assert sd.assemble(U, 0.0).K2A is sd.assemble(U + 1, 0.3).K2A
    sd_b = SemiDiscretization(get_problem("p1b").system, build_grid(8))
    assert not np.allclose(sd_b.assemble(U, 0.0).K2A, sd_b.assemble(U + 1, 0.0).K2A)


def test_singular_matrix_reports_condition():
    with pytest.raises(SingularMatrixError) as info:
        solve_dense(np.zeros((3, 3)), np.ones(3))
    assert info.value.code == "K"
    K = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_dense(K, np.ones(2))


def test_full_nodal_padding_and_shape_check():
    g = build_grid(5)
    u = full_nodal(g, np.ones((2, 4)))
    assert u.shape == (2, 6) and np.all(u[:, [0, -1]] == 0)
    with pytest.raises(ValueError):
        full_nodal(g, np.ones((2, 5)))


def test_lifted_problem_keeps_boundary_values():
    sys_ = get_problem("p1a").system
    sd = SemiDiscretization(sys_, build_grid(16))
    u = sd.full_state(sd.initial_state().U, 0.25)
    assert np.allclose(u[:, 0], sys_.gL(0.25)) and np.allclose(u[:, -1], sys_.gR(0.25))
