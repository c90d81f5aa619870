"""Error norms, convergence tables, Riemann runs and traveling-wave reports."""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import SemiDiscretization
from .errors import ConfigurationError, ConvergenceError, SingularMatrixError
from .problems import get_problem
from .sdirk import SolverConfig, get_scheme, integrate
from .spectral import build_grid
from . import traveling as tw

log = logging.getLogger(__name__)

WORKERS_ENV = "PSEUDOPARABOLIC_WORKERS"
CSV_HEADER = ["problem", "N", "dt", "scheme", "T", "err_l2", "err_h1", "err_linf",
              "order_l2", "runtime_s", "fp_iters"]
NORMS = ("grid", "quadrature")


def fmt(x):
    """Float formatting used in every CSV: 16 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".16g")


def error_norms(grid, error, domain=(-1.0, 1.0), norm="grid"):
    """``(l2, h1, linf)`` of nodal errors ``error`` (shape ``(d, N + 1)``).

    ``norm="quadrature"`` uses LGL quadrature scaled by ``(xR - xL) / 2``;
    ``norm="grid"`` weights every node by ``h = (xR - xL) / N``, the
    definition that reproduces the published tables. ``h1`` adds the same
    weighted sum of the derivative ``D1 e`` scaled to physical units.
    """
    e = np.atleast_2d(np.asarray(error, dtype=float))
    xl, xr = domain
    half = 0.5 * (xr - xl)
    de = e @ grid.D1.T / half
    if norm == "quadrature":
        w = grid.weights * half
    elif norm == "grid":
        w = np.full(grid.N + 1, (xr - xl) / grid.N)
    else:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    l2sq = float(np.sum(e * e * w))
    h1sq = l2sq + float(np.sum(de * de * w))
    return math.sqrt(l2sq), math.sqrt(h1sq), float(np.max(np.abs(e)))


@dataclass
class ErrorReport:
    problem: str
    N: int
    dt: float
    scheme: str
    T: float
    err_l2: float = math.nan
    err_h1: float = math.nan
    err_linf: float = math.nan
    runtime_s: float = 0.0
    fp_iters: int = 0
    order_l2: float = None
    failed: str = ""

    def csv_row(self):
        return [self.problem, fmt(self.N), fmt(self.dt), self.scheme, fmt(self.T),
                fmt(self.err_l2), fmt(self.err_h1), fmt(self.err_linf),
                fmt(self.order_l2), fmt(self.runtime_s), fmt(self.fp_iters)]


def observed_order(e1, e2, h1, h2):
    """``log(e1 / e2) / log(h1 / h2)``."""
    return math.log(e1 / e2) / math.log(h1 / h2)


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    def compute_orders(self):
        """Fill ``order_l2`` between consecutive rows that differ in exactly one of N, dt."""
        prev = None
        for r in self.rows:
            r.order_l2 = None
            if prev is not None and not (r.failed or prev.failed) and r.err_l2 > 0 and prev.err_l2 > 0:
                same_n, same_dt = prev.N == r.N, prev.dt == r.dt
                if same_n and not same_dt:
                    r.order_l2 = observed_order(prev.err_l2, r.err_l2, prev.dt, r.dt)
                elif same_dt and not same_n:
                    # Spatial order in terms of h ~ 1/N.
                    r.order_l2 = observed_order(prev.err_l2, r.err_l2, 1.0 / prev.N, 1.0 / r.N)
            prev = r
        return self

    def write_csv(self, path, include_runtime=True):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in self.rows:
                row = r.csv_row()
                if not include_runtime:
                    row[9] = ""
                w.writerow(row)
        return path


def workers_from_env(default=1):
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw)) if raw else default
    except ValueError:
        log.warning("ignoring non-integer %s=%r", WORKERS_ENV, raw)
        return default


def solve(problem, N, dt, scheme, T, fp_tol=1e-10, fp_max_iters=50, snapshots=(), on_snapshot=None):
    """Integrate ``problem`` (a name or a Problem) and return ``(sd, state, stats)``."""
    prob = get_problem(problem) if isinstance(problem, str) else problem
    grid = build_grid(N)
    sd = SemiDiscretization(prob.system, grid)
    cfg = SolverConfig(dt=dt, T=T, fp_tol=fp_tol, fp_max_iters=fp_max_iters)
    if T == 0:
        state = sd.initial_state()
        if on_snapshot is not None and snapshots:
            on_snapshot(state)
        return sd, state, None
    state, stats = integrate(sd, get_scheme(scheme) if isinstance(scheme, str) else scheme, cfg,
                             snapshots=snapshots, on_snapshot=on_snapshot)
    return sd, state, stats


def nodal_error(prob, sd, state):
    x = sd.hsys.to_physical(sd.grid.nodes)
    return sd.full_state(state.U, state.t) - prob.exact(x, state.t)


def run_case(problem, N, dt, scheme, T, norm="grid"):
    """One table row; solver failures are recorded on the row, not raised."""
    prob = get_problem(problem) if isinstance(problem, str) else problem
    rep = ErrorReport(prob.name, int(N), float(dt), scheme, float(T))
    if prob.exact is None:
        rep.failed = "no exact solution"
        return rep
    t0 = time.perf_counter()
    try:
        sd, state, stats = solve(prob, N, dt, scheme, T)
    except (ConvergenceError, SingularMatrixError) as exc:
        rep.failed = str(exc)
        rep.runtime_s = time.perf_counter() - t0
        return rep
    rep.runtime_s = time.perf_counter() - t0
    rep.fp_iters = stats.fp_iters if stats else 0
    rep.err_l2, rep.err_h1, rep.err_linf = error_norms(
        sd.grid, nodal_error(prob, sd, state), prob.system.domain, norm)
    return rep


def _run_case_star(args):
    return run_case(*args)


def run_convergence(problem, Ns, dts, scheme, T, norm="grid", out=None, workers=None):
    """Table over the (N, dt) pairs; ``dts`` may be one value per N or a list to sweep.

    Pairs are formed by zipping when the lists have equal length and one of
    them has length one is broadcast; a ``dt`` of ``"h/2"`` means ``1 / N``
    on the reference interval.
    """
    Ns, dts = list(Ns), list(dts)
    if len(Ns) == 1:
        Ns = Ns * len(dts)
    if len(dts) == 1:
        dts = dts * len(Ns)
    if len(Ns) != len(dts):
        raise ValueError("N and dt lists must have equal length or length one")
    dts = [1.0 / n if d == "h/2" else float(d) for n, d in zip(Ns, dts)]
    jobs = [(problem, n, d, scheme, T, norm) for n, d in zip(Ns, dts)]
    workers = workers or workers_from_env()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_case_star, jobs))
    else:
        rows = [run_case(*j) for j in jobs]
    table = ConvergenceTable(rows).compute_orders()
    if out is not None:
        table.write_csv(Path(out) / f"table_{problem}_{scheme}.csv")
    return table


# Riemann runs.


GNUPLOT_TEMPLATE = """# gnuplot script; run with: gnuplot {name}
set terminal pngcairo size 900,600
set datafile separator ','
set key top right
set xlabel 'x'
{plots}
"""


def write_profile_csv(path, x, u):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"u{i + 1}" for i in range(u.shape[0])])
        for j in range(len(x)):
            w.writerow([fmt(x[j])] + [fmt(u[i, j]) for i in range(u.shape[0])])


def write_gnuplot(path, files, ncomp=2):
    plots = []
    for f in files:
        stem = Path(f).stem
        lines = ", ".join(f"'{Path(f).name}' using 1:{c + 2} with lines title 'u{c + 1}'" for c in range(ncomp))
        plots.append(f"set output '{stem}.png'\nset title '{stem}'\nplot {lines}")
    Path(path).write_text(GNUPLOT_TEMPLATE.format(name=Path(path).name, plots="\n".join(plots)))


@dataclass
class RiemannResult:
    snapshots: dict
    files: list
    bounded: bool
    max_amplitude: float
    initial_max: float
    error: str = ""


def half_height_crossing(x, u, level):
    """Rightmost ``x`` where ``u`` crosses ``level`` (linear interpolation)."""
    s = np.sign(u - level)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    if len(idx) == 0:
        return math.nan
    i = idx[-1]
    if u[i + 1] == u[i]:
        return float(x[i])
    return float(x[i] + (level - u[i]) * (x[i + 1] - x[i]) / (u[i + 1] - u[i]))


def run_riemann(problem, N, dt, T, times, scheme="ssp23", out=None, fp_max_iters=50, growth=10.0):
    """Integrate a Riemann problem and save nodal profiles at ``times``.

    The run aborts on non-convergence or non-finite values; profiles saved
    up to then are kept and the error is reported on the result.
    """
    prob = get_problem(problem) if isinstance(problem, str) else problem
    grid = build_grid(N)
    sd = SemiDiscretization(prob.system, grid)
    x = sd.hsys.to_physical(grid.nodes)
    u_init = np.asarray(prob.system.u0(x)).reshape(sd.d, -1)
    init_max = float(np.max(np.abs(u_init)))
    snaps, files = {}, []
    outdir = Path(out) if out is not None else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)

    def keep(state):
        u = sd.full_state(state.U, state.t)
        # Key by the requested time, not the accumulated time level.
        snaps[min(times, key=lambda s: abs(s - state.t))] = u
        if outdir is not None:
            f = outdir / f"{prob.name}_t{state.t:09.4f}.csv"
            write_profile_csv(f, x, u)
            files.append(str(f))

    err = ""
    if T == 0:
        # Nodal data as given, boundary values included.
        snaps[0.0] = u_init
        if outdir is not None:
            f = outdir / f"{prob.name}_t{0.0:09.4f}.csv"
            write_profile_csv(f, x, u_init)
            files.append(str(f))
    else:
        try:
            solve(prob, N, dt, scheme, T, fp_max_iters=fp_max_iters, snapshots=times, on_snapshot=keep)
        except (ConvergenceError, SingularMatrixError) as exc:
            err = str(exc)
    amp = max((float(np.max(np.abs(u))) for u in snaps.values()), default=math.nan)
    bounded = bool(np.isfinite(amp) and amp <= growth * init_max and not err)
    if outdir is not None and files:
        write_gnuplot(outdir / f"{prob.name}.gp", files, sd.d)
    return RiemannResult(snaps, files, bounded, amp, init_max, err)


# Traveling waves.


def run_traveling(regime, u_minus, u_plus=None, alpha=0.0, orders=2, out=None, n_samples=401):
    """Dispatch to the traveling-wave analyses and write CSV reports.

    Returns a dict summarizing the run; the CSV files hold the profiles or
    the classification.
    """
    outdir = Path(out) if out is not None else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    summary = {"regime": regime}
    if regime == "balanced":
        prob = tw.TravelingWaveProblem.balanced(u_minus, alpha)
        res, dev = tw.compare_shooting(prob)
        summary.update(lam=prob.lam, u_plus=prob.u_plus, success=res.success, max_deviation=dev,
                       message=res.message)
        if outdir is not None:
            stride = max(1, len(res.y) // n_samples)
            if res.success:
                ys = tw.align_at_midpoint(res.y, res.u, tw._profile_parts(u_minus, alpha, prob.lam)[0])
                exact = tw.explicit_profile(u_minus, alpha, ys, prob.lam)
            else:
                ys, exact = res.y, np.full(len(res.y), math.nan)
            with open(outdir / "balanced_profile.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["y", "u_shooting", "v_shooting", "u_explicit"])
                for i in range(0, len(ys), stride):
                    w.writerow([fmt(ys[i]), fmt(res.u[i]), fmt(res.v[i]), fmt(exact[i])])
    elif regime == "diffusive":
        exp = tw.expand_diffusive(u_minus, u_plus, orders)
        summary.update(lam=exp.lam, residuals=exp.residuals)
        if outdir is not None:
            stride = max(1, len(exp.eta) // n_samples)
            with open(outdir / "diffusive_expansion.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["eta"] + [f"u{k}" for k in range(orders + 1)])
                for i in range(0, len(exp.eta), stride):
                    w.writerow([fmt(exp.eta[i])] + [fmt(exp.terms[k, i]) for k in range(orders + 1)])
    elif regime == "dispersive":
        cert = tw.classify_dispersive(u_minus, u_plus)
        summary.update(lam=cert.lam, types=cert.types, nonexistence=cert.nonexistence)
        if outdir is not None:
            with open(outdir / "dispersive_certificate.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["state", "lambda_minus_3u2", "type"])
                for u, t in zip(cert.states, cert.types):
                    w.writerow([fmt(u), fmt(cert.lam - 3 * u * u), t])
                w.writerow(["saddles", fmt(cert.n_saddles), "no traveling wave" if cert.nonexistence
                            else "inconclusive"])
    else:
        raise ConfigurationError(f"unknown regime {regime!r}; expected one of {tw.REGIMES}")
    return summary
