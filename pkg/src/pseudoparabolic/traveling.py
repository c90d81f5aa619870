"""Traveling waves of ``u_t + (u^3)_x = eps u_xx + delta u_xxt``.

Three regimes are covered: balanced diffusion and dispersion (phase-plane
shooting and the closed tanh profile), diffusive dominance (an asymptotic
expansion in ``delta / eps^2``) and dispersive dominance (a nonexistence
check based on the equilibrium types).

Sign convention for the balanced profile. Integrating the travelling-wave
equation once gives a relation between ``F(u) = -lam (u - u_-) + u^3 - u_-^3``
and ``u_y``, ``u_yy``. The tanh profile and the relation
``u_1 = -u_0 + (alpha / 3) sqrt(2 / lam)`` hold for

    alpha u_y + lam u_yy = F(u),

which is what :func:`profile_residual` checks by default and what
:func:`shoot_connection` integrates. The variant
``alpha u_y - lam u_yy = F(u)`` is available as ``form="printed"``;
:func:`equilibria` classifies the equilibria of that variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, DomainError, ValidityError

REGIMES = ("balanced", "diffusive", "dispersive")


def shock_speed(u_minus, u_plus):
    """Rankine-Hugoniot speed of a jump for the flux ``u^3``."""
    return u_minus * u_minus + u_minus * u_plus + u_plus * u_plus


def cubic_rhs(u, u_minus, lam):
    """``F(u) = -lam (u - u_-) + u^3 - u_-^3``."""
    return -lam * (u - u_minus) + (u**3 - u_minus**3)


@dataclass(frozen=True)
class TravelingWaveProblem:
    u_minus: float
    u_plus: float
    regime: str = "balanced"
    alpha: float = 0.0
    eps_small: float = 0.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigurationError(f"regime must be one of {REGIMES}, got {self.regime!r}")

    @property
    def lam(self):
        return shock_speed(self.u_minus, self.u_plus)

    @classmethod
    def balanced(cls, u_minus, alpha):
        """Balanced-regime problem whose right state admits the tanh connection."""
        lam = balanced_speed(u_minus, alpha)
        return cls(u_minus, connection_state(u_minus, alpha, lam), "balanced", alpha)


# Balanced regime.


@dataclass(frozen=True)
class EquilibriumReport:
    u0: float
    u1: float
    u2: float
    delta1: float
    types: tuple
    eigenvalues: tuple

    @property
    def states(self):
        return (self.u0, self.u1, self.u2)


def _classify(mu_minus, mu_plus, tol=1e-14):
    re_m, re_p = mu_minus.real, mu_plus.real
    if abs(mu_minus.imag) > 0:
        if abs(re_m) <= tol:
            return "center"
        return "repulsor" if re_m > 0 else "attractor"
    if re_m > tol and re_p > tol:
        return "repulsor"
    if re_m < -tol and re_p < -tol:
        return "attractor"
    if re_m * re_p < 0:
        return "saddle"
    return "degenerate"


def linearization_eigenvalues(u, alpha, lam):
    """``mu_pm = (alpha / lam +- sqrt(Delta)) / 2`` with ``Delta = alpha^2/lam^2 + 4 (1 - 3 u^2 / lam)``."""
    disc = (alpha / lam) ** 2 + 4.0 * (1.0 - 3.0 * u * u / lam)
    root = np.sqrt(complex(disc))
    return 0.5 * (alpha / lam - root), 0.5 * (alpha / lam + root)


def equilibria(u_minus, lam, alpha=0.0):
    """Equilibria ``u_0 = u_-`` and the roots of ``u^2 + u u_- + u_-^2 = lam``, classified."""
    delta1 = 4.0 * lam - 3.0 * u_minus**2
    if delta1 < 0:
        raise DomainError(f"complex equilibria: 4 lam - 3 u_-^2 = {delta1:.6g} < 0")
    r = math.sqrt(delta1)
    states = (u_minus, 0.5 * (-u_minus + r), 0.5 * (-u_minus - r))
    eigs = tuple(linearization_eigenvalues(u, alpha, lam) for u in states)
    types = tuple(_classify(*e) for e in eigs)
    return EquilibriumReport(*states, delta1=delta1, types=types, eigenvalues=eigs)


def connection_state(u_minus, alpha, lam):
    """``u_1 = -u_0 + (alpha / 3) sqrt(2 / lam)``."""
    return -u_minus + alpha / 3.0 * math.sqrt(2.0 / lam)


def balanced_speed(u_minus, alpha):
    """The speed for which ``u_1`` above is a root, i.e. ``lam = shock_speed(u_-, u_1)``."""
    if u_minus <= 0:
        raise ValidityError("the balanced profile needs u_- > 0")

    def h(lam):
        return shock_speed(u_minus, connection_state(u_minus, alpha, lam)) - lam

    hi = max(u_minus**2, 1.0)
    while h(hi) > 0:
        hi *= 2.0
    lo = hi
    while h(lo) < 0:
        lo *= 0.5
        if lo < 1e-300:
            raise ValidityError("no balanced speed found")
    return brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def alpha_threshold(u_minus):
    """Supremum of ``alpha`` with ``u_- > (2/3) sqrt(2/lam) alpha`` at the balanced speed.

    At equality ``u_1 = -u_-/2`` and ``lam = 3 u_-^2 / 4``, which gives
    ``alpha = (3 sqrt(6) / 8) u_-^2``.
    """
    return 3.0 * math.sqrt(6.0) / 8.0 * u_minus * u_minus


def _check_profile_params(u_minus, alpha, lam):
    threshold = 2.0 / 3.0 * math.sqrt(2.0 / lam) * alpha
    if not u_minus > threshold:
        raise ValidityError(
            f"explicit profile needs u_- > (2/3) sqrt(2/lam) alpha = {threshold:.6g}, got u_- = {u_minus:.6g}")
    lam_ok = balanced_speed(u_minus, alpha)
    if abs(lam - lam_ok) > 1e-9 * lam_ok:
        raise ValidityError(
            f"lam = {lam:.12g} is not the connection speed {lam_ok:.12g} for u_- = {u_minus}, alpha = {alpha}")


def _profile_parts(u_minus, alpha, lam):
    a = alpha / (3.0 * math.sqrt(2.0 * lam))
    b = u_minus - a
    k = b / math.sqrt(2.0 * lam)
    return a, b, k


def explicit_profile(u_minus, alpha, y, lam=None):
    """Closed-form profile ``a - b tanh(b y / sqrt(2 lam))``, ``a = alpha / (3 sqrt(2 lam))``, ``b = u_- - a``.

    ``lam`` defaults to :func:`balanced_speed`; a different value raises
    :class:`ValidityError` since the profile only exists at that speed.
    """
    lam = balanced_speed(u_minus, alpha) if lam is None else lam
    _check_profile_params(u_minus, alpha, lam)
    a, b, k = _profile_parts(u_minus, alpha, lam)
    return a - b * np.tanh(k * np.asarray(y, dtype=float))


def explicit_profile_derivatives(u_minus, alpha, y, lam=None):
    """``(u, u_y, u_yy)`` of the closed-form profile."""
    lam = balanced_speed(u_minus, alpha) if lam is None else lam
    _check_profile_params(u_minus, alpha, lam)
    a, b, k = _profile_parts(u_minus, alpha, lam)
    th = np.tanh(k * np.asarray(y, dtype=float))
    sech2 = 1.0 - th * th
    return a - b * th, -b * k * sech2, 2.0 * b * k * k * th * sech2


def profile_residual(u, u_y, u_yy, u_minus, alpha, lam, form="resolved"):
    """Residual of the once-integrated profile equation.

    ``resolved``: ``alpha u_y + lam u_yy - F(u)``;
    ``printed``: ``alpha u_y - lam u_yy - F(u)``.
    """
    sign = {"resolved": 1.0, "printed": -1.0}[form]
    return alpha * u_y + sign * lam * u_yy - cubic_rhs(u, u_minus, lam)


def rk4(rhs, y0, h, n_steps, stop=None):
    """Classical fixed-step RK4; ``stop(y)`` may end the run early.

    Returns the array of visited states, shape ``(k + 1, len(y0))``.
    """
    y = np.array(y0, dtype=float)
    out = [y.copy()]
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out.append(y)
        if stop is not None and stop(y):
            break
    return np.array(out)


def _g(u, lam):
    return u - u**3 / lam


def phase_plane_rhs(u_minus, alpha, lam, form="resolved"):
    """Right-hand side of the first-order system for ``(u, v = u_y)``.

    ``printed``: ``v' = (alpha/lam) v + g(u) - g(u_-)``;
    ``resolved``: ``v' = -(alpha/lam) v - (g(u) - g(u_-))``, with ``g(u) = u - u^3/lam``.
    """
    gm = _g(u_minus, lam)
    sign = {"resolved": -1.0, "printed": 1.0}[form]

    def rhs(y):
        u, v = y
        return np.array([v, sign * (alpha / lam * v + _g(u, lam) - gm)])
    return rhs


def hamiltonian(u, v, u_minus, lam):
    """``H = v^2/2 - int_{u_-}^u (g(s) - g(u_-)) ds``, conserved by the printed system at ``alpha = 0``."""
    gm = _g(u_minus, lam)

    def prim(s):
        return s**2 / 2.0 - s**4 / (4.0 * lam) - gm * s
    return 0.5 * v * v - (prim(u) - prim(u_minus))


@dataclass
class ShootingResult:
    success: bool
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray
    closest_distance: float
    closest_y: float
    message: str = ""


def shoot_connection(problem, h=1e-3, y_max=200.0, radius=1e-6, blowup=1e6):
    """Shoot from the unstable manifold of ``(u_-, 0)`` towards ``(u_+, 0)``.

    Starts at ``(u_-, 0) + eta e`` with ``eta = 1e-6 |u_- - u_+|`` and ``e``
    the unstable eigenvector pointing towards ``u_+``, and integrates the
    resolved phase-plane system with RK4. Succeeds when the orbit enters the
    ball of radius ``radius`` about ``(u_+, 0)``; otherwise the closest
    approach is reported.
    """
    u0, u1, alpha, lam = problem.u_minus, problem.u_plus, problem.alpha, problem.lam
    if problem.regime != "balanced":
        raise ConfigurationError("shooting applies to the balanced regime only")
    if u0 == u1:
        raise ValidityError("left and right states coincide")
    # Jacobian of the resolved system at (u0, 0).
    gu = 1.0 - 3.0 * u0 * u0 / lam
    jac = np.array([[0.0, 1.0], [-gu, -alpha / lam]])
    w, vecs = np.linalg.eig(jac)
    unstable = [i for i in range(2) if w[i].real > 0 and abs(w[i].imag) == 0]
    if len(unstable) != 1:
        raise ValidityError(f"(u_-, 0) is not a saddle of the profile system (eigenvalues {w})")
    e = np.real(vecs[:, unstable[0]])
    e /= np.linalg.norm(e)
    if e[0] * (u1 - u0) < 0:
        e = -e
    eta = 1e-6 * abs(u0 - u1)
    target = np.array([u1, 0.0])
    rhs = phase_plane_rhs(u0, alpha, lam)
    best = [np.inf, 0]
    count = [0]

    def stop(y):
        count[0] += 1
        dist = float(np.hypot(y[0] - target[0], y[1] - target[1]))
        if dist < best[0]:
            best[0], best[1] = dist, count[0]
        return dist < radius or not np.all(np.isfinite(y)) or abs(y[0]) > blowup

    traj = rk4(rhs, np.array([u0, 0.0]) + eta * e, h, int(round(y_max / h)), stop)
    ys = h * np.arange(len(traj))
    final = traj[-1]
    ok = bool(np.all(np.isfinite(final)) and np.hypot(*(final - target)) < radius)
    if ok:
        msg = "reached the target equilibrium"
    elif not np.all(np.isfinite(final)) or abs(final[0]) > blowup:
        msg = "orbit blew up"
    else:
        msg = "orbit did not approach the target within the y budget"
    return ShootingResult(ok, ys, traj[:, 0], traj[:, 1], best[0], best[1] * h, msg)


def align_at_midpoint(y, u, level):
    """Shift ``y`` so that ``u`` crosses ``level`` at 0 (linear interpolation, first crossing)."""
    s = np.sign(u - level)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    if len(idx) == 0:
        raise ValidityError("profile never crosses the alignment level")
    i = idx[0]
    frac = (level - u[i]) / (u[i + 1] - u[i]) if u[i + 1] != u[i] else 0.0
    return y - (y[i] + frac * (y[i + 1] - y[i]))


def compare_shooting(problem, **kwargs):
    """Max deviation between the shot orbit and the closed form after alignment."""
    res = shoot_connection(problem, **kwargs)
    if not res.success:
        return res, np.inf
    a, _, _ = _profile_parts(problem.u_minus, problem.alpha, problem.lam)
    ys = align_at_midpoint(res.y, res.u, a)
    exact = explicit_profile(problem.u_minus, problem.alpha, ys, problem.lam)
    return res, float(np.max(np.abs(exact - res.u)))


# Diffusive dominance.


@dataclass
class DiffusiveExpansion:
    eta: np.ndarray
    terms: np.ndarray  # shape (orders + 1, len(eta))
    lam: float
    u_minus: float
    u_plus: float
    residuals: list = field(default_factory=list)

    def profile(self, eps, order=None):
        order = self.terms.shape[0] - 1 if order is None else order
        return sum(eps**k * self.terms[k] for k in range(order + 1))


def _expansion_rhs(u_minus, lam):
    def rhs(z):
        u0, u1, u2 = z
        a = 3.0 * u0 * u0 - lam
        f = cubic_rhs(u0, u_minus, lam)
        u0pp = a * f
        u0ppp = 6.0 * u0 * f * f + a * u0pp
        du1 = a * u1 + lam * u0pp
        u1pp = 6.0 * u0 * f * u1 + a * du1 + lam * u0ppp
        du2 = a * u2 + 3.0 * u0 * u1 * u1 + lam * u1pp
        return np.array([f, du1, du2])
    return rhs


def _fd1(f, h):
    # Sixth-order central first derivative; the three points at each end are left as NaN.
    d = np.full_like(f, np.nan)
    d[3:-3] = (f[6:] - 9 * f[5:-1] + 45 * f[4:-2] - 45 * f[2:-4] + 9 * f[1:-5] - f[:-6]) / (60 * h)
    return d


def _fd2(f, h):
    d = np.full_like(f, np.nan)
    d[3:-3] = (2 * f[6:] - 27 * f[5:-1] + 270 * f[4:-2] - 490 * f[3:-3]
               + 270 * f[2:-4] - 27 * f[1:-5] + 2 * f[:-6]) / (180 * h * h)
    return d


def expansion_residuals(exp):
    """Max residuals of the order equations, by sixth-order differences on interior points."""
    eta = exp.eta
    h = eta[1] - eta[0]
    lam, um = exp.lam, exp.u_minus
    u0 = exp.terms[0]
    inner = slice(3, -3)
    res = [np.max(np.abs(_fd1(u0, h) - cubic_rhs(u0, um, lam))[inner])]
    a = 3.0 * u0 * u0 - lam
    if exp.terms.shape[0] > 1:
        u1 = exp.terms[1]
        res.append(np.max(np.abs(_fd1(u1, h) - a * u1 - lam * _fd2(u0, h))[inner]))
    if exp.terms.shape[0] > 2:
        u1, u2 = exp.terms[1], exp.terms[2]
        res.append(np.max(np.abs(_fd1(u2, h) - a * u2 - 3 * u0 * u1 * u1 - lam * _fd2(u1, h))[inner]))
    return [float(r) for r in res]


def expand_diffusive(u_minus, u_plus, orders=2, h=1e-3, half_width=40.0):
    """Terms ``u_0, u_1, u_2`` of the small-dispersion expansion of the profile.

    ``u_0' = F(u_0)``, ``u_1' = (3 u_0^2 - lam) u_1 + lam u_0''`` and
    ``u_2' = (3 u_0^2 - lam) u_2 + 3 u_0 u_1^2 + lam u_1''``. The derivatives
    ``u_0''`` and ``u_1''`` are eliminated analytically, and the coupled
    system is integrated with RK4 outwards from ``eta = 0``, where
    ``u_0 = (u_- + u_+) / 2`` and ``u_1 = u_2 = 0``. Outward integration is
    stable because ``3 u_0^2 - lam`` is positive at the left state and
    negative at the right one. The pins fix the translation mode ``u_0'``,
    which solves the homogeneous corrector equations.
    """
    if orders not in (0, 1, 2):
        raise ConfigurationError("orders must be 0, 1 or 2")
    if u_minus < u_plus:
        raise ValidityError("the diffusive profile needs u_- > u_+")
    third = -(u_minus + u_plus)
    if u_plus < third < u_minus:
        raise ValidityError(
            f"third equilibrium {third:.6g} lies between the states; the order-0 profile is not monotone")
    lam = shock_speed(u_minus, u_plus)
    n = int(round(half_width / h))
    eta = h * np.arange(-n, n + 1)
    rhs = _expansion_rhs(u_minus, lam)
    start = np.array([0.5 * (u_minus + u_plus), 0.0, 0.0])
    fwd = rk4(rhs, start, h, n)
    bwd = rk4(rhs, start, -h, n)
    terms = np.concatenate([bwd[::-1], fwd[1:]]).T[: orders + 1].copy()
    out = DiffusiveExpansion(eta=eta, terms=terms, lam=lam, u_minus=u_minus, u_plus=u_plus)
    if np.any(np.diff(terms[0]) > 1e-14):
        raise ValidityError("order-0 profile is not monotone decreasing")
    out.residuals = expansion_residuals(out) if len(eta) >= 7 else []
    return out


# Dispersive dominance.


@dataclass(frozen=True)
class DispersiveCertificate:
    lam: float
    states: tuple
    types: tuple
    n_saddles: int

    @property
    def nonexistence(self):
        return self.n_saddles <= 1


def classify_dispersive(u_minus, u_plus, tol=0.0):
    """Classify the equilibria of ``lam u'' = lam (u - u_-) - (u^3 - u_-^3)``.

    ``lam - 3 u^2 > 0`` gives a saddle, ``< 0`` a center. At most one
    saddle means no saddle-saddle connection, hence no traveling wave.
    """
    if u_minus == u_plus:
        raise ValidityError("states coincide")
    lam = shock_speed(u_minus, u_plus)
    states = (u_minus, u_plus, -(u_minus + u_plus))
    types = []
    for u in states:
        s = lam - 3.0 * u * u
        types.append("saddle" if s > tol else ("center" if s < -tol else "degenerate"))
    return DispersiveCertificate(lam, states, tuple(types), types.count("saddle"))
