import math
import warnings

import numpy as np
import pytest

from pseudoparabolic.errors import ConfigurationError
from pseudoparabolic.problems import get_problem, p1_exact, quadratic_flux, quadratic_flux_jacobian
from pseudoparabolic.system import (SystemDef, check_boundary_data, check_positive_definite,
                                    constant_matrix_field, fd_jacobian, homogenize, manufacture_source)


def _scalar_system(**kw):
    base = dict(d=1, A=constant_matrix_field([[1.0]]), B=constant_matrix_field([[1.0]]),
                G=lambda u: 0.5 * u**2, u0=lambda x: np.atleast_2d(np.sin(np.pi * x)))
    base.update(kw)
    return SystemDef(**base)


def test_defaults_are_filled():
    s = _scalar_system()
    u = np.array([[0.3, -2.0]])
    assert np.allclose(s.dG(u)[0, 0], u[0], atol=1e-8)
    assert np.allclose(s.gamma(u, np.zeros(2), 0.0), 0.0)
    assert np.allclose(s.gL(1.0), 0.0) and np.allclose(s.dgR(1.0), 0.0)


def test_invalid_definitions():
    with pytest.raises(ConfigurationError):
        _scalar_system(d=0)
    with pytest.raises(ConfigurationError):
        _scalar_system(domain=(1.0, -1.0))


def test_fd_jacobian_matches_analytic():
    u = np.random.default_rng(1).normal(size=(2, 7))
    assert np.allclose(fd_jacobian(quadratic_flux, 2)(u), quadratic_flux_jacobian(u), atol=1e-8)


def test_homogenize_maps_domain_and_lift():
    s = get_problem("p1a").system
    h = homogenize(s)
    assert h.scale == pytest.approx(1 / math.pi)
    xi = np.array([-1.0, 0.0, 1.0])
    assert np.allclose(h.to_physical(xi), [-math.pi, 0, math.pi])
    assert np.allclose(h.to_reference(h.to_physical(xi)), xi)
    lift = h.lift(xi, 0.3)
    assert np.allclose(lift[:, 0], s.gL(0.3)) and np.allclose(lift[:, -1], s.gR(0.3))
    # The homogeneous initial datum vanishes at both ends.
    v0 = h.initial(xi)
    assert np.allclose(v0[:, [0, -1]], 0.0, atol=1e-12)
    # Coefficient scaling.
    u = np.zeros((2, 3))
    assert np.allclose(h.A(u), s.A(u) / math.pi**2)
    assert np.allclose(h.dG(u + 1), s.dG(u + 1) / math.pi)


def test_manufactured_source_matches_hand_derived():
    prob = get_problem("p1b")
    made = manufacture_source(prob.system.replace(gamma=None), p1_exact)
    x = np.linspace(-3.0, 3.0, 9)
    u = p1_exact(x, 0.4)
    assert np.allclose(made.gamma(u, x, 0.4), prob.system.gamma(u, x, 0.4), atol=1e-6)


def test_positive_definite_check_warns():
    s = _scalar_system(A=lambda u: -np.ones((1, 1) + np.shape(u)[1:]))
    with pytest.warns(RuntimeWarning):
        assert check_positive_definite(s) < 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert check_positive_definite(_scalar_system()) == pytest.approx(1.0)


def test_boundary_data_check():
    smooth = _scalar_system(gL=lambda t: np.array([math.sin(t)]))
    assert check_boundary_data(smooth, 1.0)
    for where in (0.5, 0.503):  # on and off the sample grid
        kink = _scalar_system(gL=lambda t, w=where: np.array([abs(t - w)]))
        with pytest.warns(RuntimeWarning):
            assert not check_boundary_data(kink, 1.0)
    jump = _scalar_system(gR=lambda t: np.array([float(t > 0.77)]))
    with pytest.warns(RuntimeWarning):
        assert not check_boundary_data(jump, 1.0)
