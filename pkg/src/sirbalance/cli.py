"""Batch command-line front-end.

Subcommands: ``solve`` (one scenario, selectable solution route),
``crosscheck`` (all four routes with pairwise deviations), ``generate``
(random irreducible scenarios) and ``sweep`` (K = 2 boundary trace).

Exit codes:
  0  success (crosscheck: all deviations within tolerance)
  1  malformed or invalid input (JSON syntax errors carry line/column)
  2  reducible extended matrix; the message names every offending B(n)
  3  an iterative route failed to converge
  4  scenario generation exhausted its retry budget
  5  crosscheck deviations exceeded the tolerance

Reports are JSON on stdout (or --output); sweeps and traces are CSV with a
header row, LF endings and 17-significant-digit floats, with a rendered
PNG written next to each CSV unless --no-plot is given.  Environment
variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import oracle, scenario
from .balancer import assemble_B, build_extended, solve_maxmin
from .config import DEFAULT, SolverConfig
from .errors import (
    InvalidScenario,
    NoConvergence,
    NotIrreducible,
    SirBalanceError,
    UnsupportedDimension,
)
from .model import UtilitySpec, constraint_levels, sir
from .saddle import saddle_solve, write_trace_csv
from .spectral import is_irreducible
from .utility_opt import maximize_F, maxmin_weights, qos_of_power

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_REDUCIBLE = 2
EXIT_NO_CONVERGENCE = 3
EXIT_RETRIES = 4
EXIT_DEVIATION = 5

METHODS = ("eigen", "bisect", "utility", "saddle")


def _parse_utility_flag(text):
    if text is None:
        return None
    if text == "log":
        return UtilitySpec.log()
    if text.startswith("negpow:"):
        return UtilitySpec.negpow(int(text.split(":", 1)[1]))
    raise argparse.ArgumentTypeError(
        f"utility must be 'log' or 'negpow:n', got {text!r}"
    )


def _config_from_args(args) -> SolverConfig:
    cfg = DEFAULT
    if getattr(args, "tol", None) is not None:
        cfg = replace(cfg, tol=args.tol)
    if getattr(args, "max_iter", None) is not None:
        cfg = replace(
            cfg,
            max_iter=args.max_iter,
            max_iter_opt=args.max_iter,
            max_iter_saddle=args.max_iter,
        )
    return cfg


def _load_scenario(path):
    try:
        return scenario.load(path)
    except json.JSONDecodeError as exc:
        print(
            f"error: {path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}",
            file=sys.stderr,
        )
        raise SystemExit(EXIT_INVALID)
    except (InvalidScenario, OSError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _check_irreducible(model, poly):
    B = assemble_B(model, poly)
    bad = [n + 1 for n in range(poly.N) if not is_irreducible(B[n])]
    if bad:
        names = ", ".join(f"B({n})" for n in bad)
        print(
            f"error: reducible extended matrices: {names}; the max-min "
            "solution may be non-unique and is not computed",
            file=sys.stderr,
        )
        raise SystemExit(EXIT_REDUCIBLE)


def _emit(report: dict, output) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _active_set(poly, p, tol_active):
    levels = constraint_levels(poly, p)
    return [int(n) + 1 for n in np.flatnonzero(levels >= 1.0 - tol_active)]


def _solve_one(method, model, poly, utility, cfg):
    """One route's solution as a report fragment."""
    if method == "eigen":
        sol = solve_maxmin(model, poly, cfg)
        return sol.p_bar, {
            "p_bar": sol.p_bar.tolist(),
            "beta": sol.beta,
            "level": sol.level,
            "n0": sol.n0,
            "N0": list(sol.N0),
            "sir": sol.sir.tolist(),
            "residuals": {
                "eigen": sol.diagnostics.eigen_residual,
                "a_route": sol.diagnostics.a_route_residual,
                "balance_spread": sol.diagnostics.balance_spread,
            },
        }
    if method == "bisect":
        t_star, p = oracle.bisect_maxmin(model, poly, config=cfg)
        ratios = sir(model, p) / model.gamma
        return p, {
            "p_bar": p.tolist(),
            "t_star": t_star,
            "level": float(ratios.min()),
            "beta": 1.0 / t_star,
            "N0": _active_set(poly, p, cfg.tol_active),
            "sir": sir(model, p).tolist(),
        }
    if method == "utility":
        w = maxmin_weights(model, poly, cfg)
        p = maximize_F(model, poly, utility, w, cfg)
        ratios = sir(model, p) / model.gamma
        return p, {
            "p_bar": p.tolist(),
            "weights": w.w.tolist(),
            "utility": utility.label(),
            "level": float(ratios.min()),
            "beta": float((1.0 / ratios).max()),
            "N0": _active_set(poly, p, cfg.tol_active),
            "sir": sir(model, p).tolist(),
        }
    if method == "saddle":
        res = saddle_solve(model, poly, utility, cfg)
        ratios = sir(model, res.p) / model.gamma
        return res.p, {
            "p_bar": res.p.tolist(),
            "weights": res.w.w.tolist(),
            "utility": utility.label(),
            "level": float(ratios.min()),
            "beta": float((1.0 / ratios).max()),
            "N0": _active_set(poly, res.p, cfg.tol_active),
            "sir": sir(model, res.p).tolist(),
            "iterations": res.iterations,
            "G_value": res.value,
        }, res
    raise ValueError(method)


def cmd_solve(args) -> int:
    model, poly, file_utility = _load_scenario(args.scenario)
    utility = args.utility or file_utility
    cfg = _config_from_args(args)
    _check_irreducible(model, poly)

    ext = build_extended(model, poly, cfg)
    try:
        out = _solve_one(args.method, model, poly, utility, cfg)
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    if args.method == "saddle":
        _, fragment, res = out
        if args.trace:
            write_trace_csv(res.trace, args.trace)
            if not args.no_plot:
                from .figures import render_trace

                render_trace(res.trace, _png_path(args.trace))
    else:
        _, fragment = out
    report = {"method": args.method, "rho_B": ext.rho_B.tolist(), **fragment}
    _emit(report, args.output)
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    model, poly, file_utility = _load_scenario(args.scenario)
    utility = args.utility or file_utility
    cfg = _config_from_args(args)
    _check_irreducible(model, poly)

    results = {}
    errors = {}
    for method in METHODS:
        try:
            out = _solve_one(method, model, poly, utility, cfg)
            p = out[0]
            results[method] = {"p": p, "fragment": out[1]}
        except NoConvergence as exc:
            errors[method] = str(exc)

    deviations = {}
    worst = 0.0
    names = [m for m in METHODS if m in results]
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            dev = float(np.abs(results[a]["p"] - results[b]["p"]).max())
            deviations[f"{a}/{b}"] = dev
            worst = max(worst, dev)

    report = {
        "routes": {m: results[m]["fragment"] for m in results},
        "errors": errors,
        "deviations": deviations,
        "max_deviation": worst,
        "tolerance": args.xtol,
    }
    _emit(report, args.output)
    if errors:
        return EXIT_NO_CONVERGENCE
    return EXIT_OK if worst <= args.xtol else EXIT_DEVIATION


def cmd_generate(args) -> int:
    try:
        data = scenario.generate(args.links, args.constraints, args.seed, args.kind)
    except NotIrreducible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RETRIES
    except InvalidScenario as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = scenario.dumps(data)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _png_path(csv_path) -> str:
    base = str(csv_path)
    return (base[:-4] if base.endswith(".csv") else base) + ".png"


def _sweep_row(model, poly, utility, cfg, theta):
    gamma_dir = np.array([np.cos(theta), np.sin(theta)])
    sol = solve_maxmin(model.with_gamma(gamma_dir), poly, cfg)
    qos = qos_of_power(model, utility, sol.p_bar)
    return (
        theta,
        float(sol.sir[0]),
        float(sol.sir[1]),
        float(qos.q[0]),
        float(qos.q[1]),
        "+".join(str(n) for n in sol.N0),
    )


def cmd_sweep(args) -> int:
    model, poly, file_utility = _load_scenario(args.scenario)
    utility = args.utility or file_utility
    cfg = _config_from_args(args)
    if model.K != 2:
        print("error: sweep requires a K = 2 scenario", file=sys.stderr)
        return EXIT_INVALID
    _check_irreducible(model, poly)

    thetas = np.linspace(args.theta_min, args.theta_max, args.steps)
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(
                pool.map(lambda t: _sweep_row(model, poly, utility, cfg, t), thetas)
            )
    else:
        rows = [_sweep_row(model, poly, utility, cfg, t) for t in thetas]

    lines = ["theta,sir1,sir2,q1,q2,active_set"]
    for row in rows:
        lines.append(
            ",".join(format(v, ".17g") for v in row[:5]) + f",{row[5]}"
        )
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        if not args.no_plot:
            from .figures import render_sweep

            render_sweep(rows, _png_path(args.output), gamma=model.gamma)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sirbalance",
        description="Max-min SIR-balanced power allocation under polytope "
        "power constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None, help="Perron-root tolerance")
        p.add_argument(
            "--max-iter", type=int, default=None, help="iteration budget override"
        )
        p.add_argument(
            "--utility",
            type=_parse_utility_flag,
            default=None,
            help="override the scenario utility: log | negpow:n",
        )
        p.add_argument("-o", "--output", default=None, help="write to file")

    p_solve = sub.add_parser("solve", help="solve one scenario")
    p_solve.add_argument("scenario")
    p_solve.add_argument(
        "--method", choices=METHODS, default="eigen", help="solution route"
    )
    p_solve.add_argument(
        "--trace", default=None, help="saddle iteration trace CSV (method=saddle)"
    )
    p_solve.add_argument("--no-plot", action="store_true", help="skip trace figure")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_cross = sub.add_parser("crosscheck", help="run all four routes and compare")
    p_cross.add_argument("scenario")
    p_cross.add_argument(
        "--xtol",
        type=float,
        default=1e-3,
        help="max allowed pairwise power deviation",
    )
    common(p_cross)
    p_cross.set_defaults(func=cmd_crosscheck)

    p_gen = sub.add_parser("generate", help="generate a random scenario")
    p_gen.add_argument("--links", "-K", type=int, required=True)
    p_gen.add_argument("--constraints", "-N", type=int, required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument(
        "--kind", choices=scenario.GENERATOR_KINDS, default="individual"
    )
    p_gen.add_argument("-o", "--output", default=None)
    p_gen.set_defaults(func=cmd_generate)

    p_sweep = sub.add_parser("sweep", help="trace the K=2 boundary over directions")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--steps", type=int, default=50)
    p_sweep.add_argument("--theta-min", type=float, default=0.02)
    p_sweep.add_argument("--theta-max", type=float, default=float(np.pi / 2) - 0.02)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--no-plot", action="store_true", help="skip boundary figure")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    except NotIrreducible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REDUCIBLE
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except UnsupportedDimension as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SirBalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
