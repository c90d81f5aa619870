"""Command-line driver.

Exit codes: 0 on success, 2 when a solver fails, 3 on a configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigurationError, ConvergenceError, PseudoParabolicError, SingularMatrixError, ValidityError
from .harness import (CSV_HEADER, NORMS, ConvergenceTable, ErrorReport, error_norms, nodal_error,
                      run_convergence, run_riemann, run_traveling, solve, write_gnuplot, write_profile_csv)
from .problems import PROBLEM_NAMES, get_problem
from .sdirk import SCHEMES

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3

log = logging.getLogger("pseudoparabolic")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _dts(text):
    return [v.strip() if v.strip() == "h/2" else float(v) for v in text.split(",") if v.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="pseudoparabolic",
                                description="Legendre G-NI / SDIRK solver for pseudo-parabolic systems")
    p.add_argument("--config", help="INI file defining a problem (see README)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="integrate one problem and write the final profile")
    s.add_argument("--problem", help=f"one of {', '.join(PROBLEM_NAMES)} (or use --config)")
    s.add_argument("--N", type=int)
    s.add_argument("--dt", type=float)
    s.add_argument("--T", type=float)
    s.add_argument("--scheme", choices=sorted(SCHEMES))
    s.add_argument("--times", type=_floats, default=None, help="comma-separated snapshot times")
    s.add_argument("--fp-tol", type=float, default=None)
    s.add_argument("--fp-max-iters", type=int, default=None)
    s.add_argument("--norm", choices=NORMS, default="grid")
    s.add_argument("--out", default="out")

    t = sub.add_parser("table", help="convergence table against an exact solution")
    t.add_argument("--problem", required=True, choices=PROBLEM_NAMES)
    t.add_argument("--N", type=_ints, required=True, help="comma-separated list")
    t.add_argument("--dt", type=_dts, required=True, help="comma-separated list; 'h/2' means 1/N")
    t.add_argument("--scheme", choices=sorted(SCHEMES), default="ssp22")
    t.add_argument("--T", type=float, default=1.0)
    t.add_argument("--norm", choices=NORMS, default="grid")
    t.add_argument("--out", default="out")

    w = sub.add_parser("tw", help="traveling-wave analysis for the cubic flux")
    w.add_argument("--regime", required=True, choices=["balanced", "diffusive", "dispersive"])
    w.add_argument("--ul", type=float, required=True)
    w.add_argument("--ur", type=float, default=None, help="right state (derived in the balanced regime)")
    w.add_argument("--alpha", type=float, default=0.0)
    w.add_argument("--orders", type=int, choices=[0, 1, 2], default=2)
    w.add_argument("--out", default="out")
    return p


def _solve_cmd(args):
    if args.config:
        prob, settings = load_config(args.config)
    elif args.problem:
        prob, settings = get_problem(args.problem), {}
    else:
        raise ConfigurationError("solve needs --problem or --config")
    defaults = {"N": 64, "dt": 0.01, "T": 1.0, "scheme": "ssp23", "fp_tol": 1e-10, "fp_max_iters": 50}
    defaults.update(prob.defaults)
    defaults.update(settings)
    opts = {k: getattr(args, k) for k in ("N", "dt", "T", "scheme", "fp_tol", "fp_max_iters")}
    opts = {k: (v if v is not None else defaults[k]) for k, v in opts.items()}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if prob.name.startswith("riemann"):
        times = args.times or [opts["T"]]
        res = run_riemann(prob, opts["N"], opts["dt"], opts["T"], times, opts["scheme"], out,
                          fp_max_iters=opts["fp_max_iters"])
        print(f"{prob.name}: {len(res.files)} snapshot(s) in {out}, max |u| = {res.max_amplitude:.6g}")
        if res.error:
            log.error("%s", res.error)
            return EXIT_SOLVER
        return EXIT_OK
    t0 = time.perf_counter()
    files = []
    sd, state, stats = solve(prob, opts["N"], opts["dt"], opts["scheme"], opts["T"],
                             fp_tol=opts["fp_tol"], fp_max_iters=opts["fp_max_iters"])
    runtime = time.perf_counter() - t0
    x_phys = sd.hsys.to_physical(sd.grid.nodes)
    u = sd.full_state(state.U, state.t)
    f = out / f"{prob.name}_N{opts['N']}_T{state.t:g}.csv"
    write_profile_csv(f, x_phys, u)
    files.append(str(f))
    write_gnuplot(out / f"{prob.name}.gp", files, sd.d)
    if prob.exact is not None:
        rep = ErrorReport(prob.name, opts["N"], opts["dt"], opts["scheme"], opts["T"],
                          runtime_s=runtime, fp_iters=stats.fp_iters if stats else 0)
        rep.err_l2, rep.err_h1, rep.err_linf = error_norms(sd.grid, nodal_error(prob, sd, state),
                                                           prob.system.domain, args.norm)
        ConvergenceTable([rep]).write_csv(out / f"errors_{prob.name}.csv")
        print(f"{prob.name}: L2 {rep.err_l2:.6e}  H1 {rep.err_h1:.6e}  Linf {rep.err_linf:.6e}")
    else:
        print(f"{prob.name}: profile written to {f}")
    return EXIT_OK


def _table_cmd(args):
    table = run_convergence(args.problem, args.N, args.dt, args.scheme, args.T, norm=args.norm, out=args.out)
    print(",".join(CSV_HEADER))
    for r in table.rows:
        print(",".join(r.csv_row()))
    failed = [r for r in table.rows if r.failed]
    for r in failed:
        log.error("row N=%d dt=%g failed: %s", r.N, r.dt, r.failed)
    return EXIT_SOLVER if failed else EXIT_OK


def _tw_cmd(args):
    if args.regime != "balanced" and args.ur is None:
        raise ConfigurationError(f"--ur is required for the {args.regime} regime")
    summary = run_traveling(args.regime, args.ul, args.ur, args.alpha, args.orders, args.out)
    print(json.dumps(summary, default=_json_default, sort_keys=True))
    if args.regime == "balanced" and not summary["success"]:
        return EXIT_SOLVER
    return EXIT_OK


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    handlers = {"solve": _solve_cmd, "table": _table_cmd, "tw": _tw_cmd}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, ValidityError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (ConvergenceError, SingularMatrixError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except PseudoParabolicError as exc:
        log.error("%s", exc)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
