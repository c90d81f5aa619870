import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre as npleg

from pseudoparabolic.errors import DomainError
from pseudoparabolic.spectral import (build_grid, evaluate_modal, interpolate, legendre_eval, legendre_table,
                                      nodal_basis, nodal_basis_deriv, project_L2)


def test_legendre_low_degrees():
    x = np.linspace(-1, 1, 11)
    assert np.allclose(legendre_eval(0, x), 1.0)
    assert np.allclose(legendre_eval(1, x), x)
    assert np.allclose(legendre_eval(2, x), 1.5 * x**2 - 0.5)
    assert legendre_eval(5, 1.0) == pytest.approx(1.0)
    assert legendre_eval(5, -1.0) == pytest.approx(-1.0)


def test_legendre_matches_numpy():
    x = np.linspace(-1, 1, 37)
    table = legendre_table(30, x)
    for k in (3, 17, 30):
        c = np.zeros(k + 1)
        c[k] = 1
        assert np.allclose(table[k], npleg.legval(x, c), atol=1e-12)


def test_legendre_domain_errors():
    with pytest.raises(DomainError):
        legendre_eval(3, 1.5)
    with pytest.raises(DomainError):
        legendre_eval(-1, 0.0)


@pytest.mark.parametrize("N", [2, 4, 8, 16, 64, 256])
def test_weights_sum_and_symmetry(N):
    g = build_grid(N)
    assert g.weights.sum() == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(g.nodes, -g.nodes[::-1], atol=0)
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0
    assert np.all(np.diff(g.nodes) > 0)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_nodes_are_roots_of_derivative(N):
    g = build_grid(N)
    c = np.zeros(N + 1)
    c[N] = 1
    dL = npleg.legval(g.nodes[1:-1], npleg.legder(c))
    assert np.max(np.abs(dL)) < 1e-10 * N**2


@pytest.mark.parametrize("N", [8, 32, 256])
def test_quadrature_exact_to_degree_2N_minus_1(N):
    g = build_grid(N)
    for k in range(0, 2 * N, max(1, N // 4)):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert g.quad(g.nodes**k) == pytest.approx(exact, abs=3e-11)


def test_lgl_nodes_against_numpy_roots():
    N = 12
    c = np.zeros(N + 1)
    c[N] = 1
    roots = np.sort(npleg.legroots(npleg.legder(c)))
    assert np.allclose(build_grid(N).nodes[1:-1], roots, atol=1e-13)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_differentiation_exact_on_polynomials(N):
    g = build_grid(N)
    x = g.nodes
    for k in (1, 2, N // 2, N):
        assert np.max(np.abs(g.D1 @ x**k - k * x ** (k - 1))) < 1e-9 * N**2
    assert np.max(np.abs(g.D1.sum(axis=1))) < 1e-11 * N
    assert np.allclose(g.D2, g.D1 @ g.D1)


def test_grid_is_read_only_and_cached():
    g = build_grid(16)
    assert build_grid(16) is g
    with pytest.raises(ValueError):
        g.nodes[0] = 0.0
    with pytest.raises(DomainError):
        build_grid(1)


def test_nodal_basis_cardinal_and_derivative():
    g = build_grid(10)
    for j in (0, 3, 10):
        vals = [nodal_basis(g, j, x) for x in g.nodes]
        assert np.allclose(vals, np.eye(11)[j])
    # Derivative away from nodes vs a central difference.
    x0, h = 0.123, 1e-6
    for j in (0, 4, 10):
        fd = (nodal_basis(g, j, x0 + h) - nodal_basis(g, j, x0 - h)) / (2 * h)
        assert nodal_basis_deriv(g, j, x0) == pytest.approx(fd, rel=1e-6, abs=1e-8)
        assert nodal_basis_deriv(g, j, g.nodes[2]) == pytest.approx(g.D1[2, j])


def test_projection_roundtrip_and_exactness():
    g = build_grid(20)
    coeffs = np.random.default_rng(0).normal(size=20)  # degree 19 <= N - 1
    samples = evaluate_modal(coeffs, g.nodes)
    back = project_L2(g, samples)
    assert np.allclose(back[:20], coeffs, atol=1e-12)
    assert abs(back[20]) < 1e-12


def test_projection_error_decays_spectrally():
    errs = []
    xs = np.linspace(-1, 1, 401)
    for N in (8, 16, 32):
        g = build_grid(N)
        c = project_L2(g, np.exp(np.sin(np.pi * g.nodes)))
        errs.append(np.max(np.abs(evaluate_modal(c, xs) - np.exp(np.sin(np.pi * xs)))))
    assert errs[1] < errs[0] / 10 and errs[2] < errs[1] / 100


def test_interpolate_smooth_function():
    g = build_grid(32)
    xs = np.linspace(-1, 1, 57)
    vals = np.stack([np.sin(g.nodes), np.cos(3 * g.nodes)])
    out = interpolate(g, vals, xs)
    assert np.allclose(out, np.stack([np.sin(xs), np.cos(3 * xs)]), atol=1e-13)
    assert np.allclose(interpolate(g, vals, g.nodes), vals)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=60), st.floats(min_value=-1, max_value=1))
def test_interpolation_reproduces_polynomials(N, x0):
    g = build_grid(N)
    k = N // 2
    assert interpolate(g, g.nodes**k, [x0])[0] == pytest.approx(x0**k, abs=1e-11)
