"""Command-line front end.

Exit codes: 0 success, 2 parameter or configuration error, 3 non-convergence
or I/O failure, 64 unknown subcommand.
"""

import argparse
import sys
import time

import numpy as np

from .analysis import (
    loss_of_smoothness_scan,
    regularization_experiment,
    scan_anomalies,
    scan_threshold,
    stability_experiment,
)
from .config import load_config
from .duhamel import eta_constant, riesz_convolution_check
from .errors import ConvergenceError, ParameterError, PMNSError
from .grid import FrequencyGrid
from .landau import b_of_c, b_surface_quadrature, c_of_b, landau_report
from .norms import pm_values
from .report import RunManifest, dumps_json, emit_report, run_id_for
from .solver import SolverConfig, picard_solve, stationary_solve
from .symbols import kappa_estimate

EXIT_OK, EXIT_PARAM, EXIT_RUN, EXIT_USAGE = 0, 2, 3, 64
DEFAULT_OUT = "pmns-runs"

COMMANDS = ("landau-verify", "bofc", "cofb", "solve", "stationary", "stability", "regularize", "scan", "constants")


def _parser():
    p = argparse.ArgumentParser(prog="pmns", description="Pseudomeasure-space Navier-Stokes laboratory")
    sub = p.add_subparsers(dest="command", metavar="command")

    s = sub.add_parser("landau-verify", help="closed-form checks of a Landau solution")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--quad", type=int, default=256)

    s = sub.add_parser("bofc", help="forcing amplitude b(c)")
    s.add_argument("--c", type=float, required=True)

    s = sub.add_parser("cofb", help="invert b(c)")
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--branch", choices=("positive", "negative"), default=None)

    for name, text in (("solve", "Picard solve"), ("stationary", "stationary solve"), ("stability", "stability experiment")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=DEFAULT_OUT)

    s = sub.add_parser("regularize", help="weighted PM^a and L^q curves")
    s.add_argument("--config", required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--q", type=float, default=None)
    s.add_argument("--out", default=DEFAULT_OUT)

    s = sub.add_parser("scan", help="loss-of-smoothness scan along Landau data")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--eps", required=True, help="comma-separated, increasing")
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--delta-xi", type=float, default=1.0)
    s.add_argument("--max-iter", type=int, default=60)
    s.add_argument("--out", default=None)

    s = sub.add_parser("constants", help="kappa, pi^3, eta variants and the Riesz table")
    s.add_argument("--out", default=None)
    return p


def _print(obj):
    sys.stdout.write(dumps_json(obj))


def _emit(command, cfg_echo, digest, payload, out, curves=None, fields=None, t0=None, extra=None):
    run = RunManifest(command, cfg_echo, run_id_for(command, cfg_echo, extra), {"config": digest} if digest else {})
    run.wall_time = time.perf_counter() - t0 if t0 is not None else 0.0
    paths = emit_report(run, payload, out, curves, fields)
    sys.stderr.write(f"wrote {len(paths)} files to {out}/{run.run_id}\n")
    return run


def cmd_landau_verify(args):
    _print(landau_report(args.c, args.quad))


def cmd_bofc(args):
    b = b_of_c(args.c)
    bq = b_surface_quadrature(args.c)
    _print({"c": args.c, "b_closed_form": b, "b_quadrature": bq, "rel_diff": abs(b - bq) / abs(b)})


def cmd_cofb(args):
    branch = args.branch or ("positive" if args.b > 0 else "negative")
    c = c_of_b(args.b, branch)
    _print({"b": args.b, "branch": branch, "c": c, "residual": b_of_c(c) - args.b})


def _norm_rows(traj):
    norms = pm_values(traj.coeffs, traj.grid, 2)
    return [(float(t), float(v)) for t, v in zip(traj.knots, norms)]


def cmd_solve(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    res = picard_solve(cfg.data(), cfg.force(), cfg.knots, cfg.solver)
    rows = _norm_rows(res.solution)
    payload = {"grid": cfg.grid.to_dict(), "solver": cfg.solver.to_dict(), "report": res.report, "pm2_per_knot": rows}
    fields = {f"field_{i:04d}": f for i, f in enumerate(res.solution.fields())}
    _emit("solve", cfg.echo(), cfg.digest, payload, args.out, {"pm2": (("t", "pm2"), rows)}, fields, t0)
    _print({"iterates": res.report.iterates, "ball_radius": res.report.ball_radius, "final_residual": res.report.final_residual})


def cmd_stationary(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    res = stationary_solve(cfg.force(), cfg.solver, cfg.grid)
    payload = {"grid": cfg.grid.to_dict(), "solver": cfg.solver.to_dict(), "report": res.report}
    _emit("stationary", cfg.echo(), cfg.digest, payload, args.out, None, {"solution": res.solution}, t0)
    _print(res.report)


def cmd_stability(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    G = cfg.force("g") if cfg.has("g") else cfg.force()
    rep = stability_experiment(cfg.data(), cfg.data("v-data"), cfg.force(), G, cfg.knots, cfg.solver)
    curves = {
        "diff_pm2": (("t", "diff_pm2"), list(zip(rep.times, rep.diff_pm2))),
        "linear_part": (("t", "linear_part"), list(zip(rep.times, rep.linear_part))),
    }
    _emit("stability", cfg.echo(), cfg.digest, rep, args.out, curves, None, t0)
    _print({k: v for k, v in rep.to_dict().items() if k not in ("times", "diff_pm2", "linear_part")})


def cmd_regularize(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    rep = regularization_experiment(cfg.data(), cfg.force(), args.a, args.q, cfg.knots, cfg.solver)
    curves = {"weighted_norm": (("t", "weighted_pm_a"), list(zip(rep.times, rep.weighted_norm_curve)))}
    if rep.q is not None:
        curves["lq"] = (("t", "weighted_lq"), list(zip(rep.times, rep.lq_curve)))
    _emit("regularize", cfg.echo(), cfg.digest, rep, args.out, curves, None, t0, {"a": args.a, "q": args.q})
    _print({"a": rep.a, "q": rep.q, "sup_value": rep.sup_value, "bounded": rep.bounded, "lq_bound": rep.lq_bound})


def _parse_eps(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError as err:
        raise ParameterError(f"bad epsilon list {text!r}") from err


def cmd_scan(args):
    t0 = time.perf_counter()
    grid = FrequencyGrid(args.n, args.delta_xi)
    eta = eta_constant().eta_effective
    cfg = SolverConfig(epsilon=0.5 / (4 * eta), max_iter=args.max_iter)
    eps = _parse_eps(args.eps)
    records = loss_of_smoothness_scan(args.c, eps, grid, cfg)
    threshold, norm = scan_threshold(args.c, grid, eta)
    payload = {
        "c": args.c,
        "grid": grid.to_dict(),
        "lattice_pm2_norm": norm,
        "smallness_threshold": threshold,
        "records": records,
        "anomalies": scan_anomalies(records),
    }
    if args.out:
        echo = {"c": args.c, "eps": eps, "n": args.n, "delta_xi": args.delta_xi, "max_iter": args.max_iter}
        rows = [(r.epsilon, int(r.converged), r.ball_radius, r.residual) for r in records]
        _emit("scan", echo, None, payload, args.out, {"scan": (("epsilon", "converged", "ball_radius", "residual"), rows)}, None, t0)
    _print(payload)


def cmd_constants(args):
    kappa = kappa_estimate(1000)
    eta = eta_constant(kappa.value)
    rows = []
    for R in (1e2, 1e3, 1e4):
        for rec in riesz_convolution_check([(1.0, 0.0, 0.0), (2.0, 0.0, 0.0)], R, 10_000):
            rows.append({"xi": list(rec.xi), "R_max": R, "lhs": rec.lhs, "rhs": rec.rhs, "rel_err": rec.rel_err})
    payload = {
        "kappa": kappa.value,
        "pi_cubed": float(np.pi**3),
        "eta_paper": eta.eta_paper,
        "eta_effective": eta.eta_effective,
        "threshold_paper": eta.threshold_paper,
        "threshold_effective": eta.threshold_effective,
        "riesz": rows,
    }
    if args.out:
        csv_rows = [(r["R_max"], np.linalg.norm(r["xi"]), r["lhs"], r["rhs"], r["rel_err"]) for r in rows]
        _emit("constants", {}, None, payload, args.out, {"riesz": (("R_max", "xi", "lhs", "rhs", "rel_err"), csv_rows)})
    _print(payload)


HANDLERS = {
    "landau-verify": cmd_landau_verify,
    "bofc": cmd_bofc,
    "cofb": cmd_cofb,
    "solve": cmd_solve,
    "stationary": cmd_stationary,
    "stability": cmd_stability,
    "regularize": cmd_regularize,
    "scan": cmd_scan,
    "constants": cmd_constants,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _parser()
    first = next((a for a in argv if not a.startswith("-")), None)
    if first is None and not any(a in ("-h", "--help") for a in argv):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if first is not None and first not in COMMANDS:
        sys.stderr.write(f"pmns: unknown command {first!r}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARAM
    try:
        HANDLERS[args.command](args)
    except ConvergenceError as err:
        sys.stderr.write(f"pmns: {err}\n")
        if err.report is not None:
            sys.stderr.write(dumps_json(err.report))
        return EXIT_RUN
    except ParameterError as err:
        sys.stderr.write(f"pmns: {err}\n")
        return EXIT_PARAM
    except OSError as err:
        sys.stderr.write(f"pmns: I/O error: {err}\n")
        return EXIT_RUN
    except PMNSError as err:
        sys.stderr.write(f"pmns: {err}\n")
        return EXIT_RUN
    return EXIT_OK
