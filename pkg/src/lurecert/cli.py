"""Command-line driver.

Subcommands: analyze, synthesize, simulate, check, demo-paper.  Exit codes
are a stable contract: 0 success/feasible/no-violation, 1 usage or
schema/IO error, 2 negative finding (infeasible, violated, reproduction
mismatch), 3 undetermined.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, linalg
from .catalog import ALL_TAGS, LmiSpec, PreconditionError, auto_tag
from .demo import run_demo
from .model import DISCRETE, Gains, Lipschitz, Monotone, SectorBounded, close_loop, recover_gains
from .nonlin import (
    SampleScheme,
    check_lipschitz_incremental,
    check_monotone,
    check_sector_incremental,
)
from .problemio import ProblemFileError, load_problem, write_report
from .psilib import get_builtin
from .simulate import rate_estimate, simulate_ct, simulate_dt, write_trajectory_csv
from .solver import FEASIBLE, INFEASIBLE, FeasibilityProblem, SolveOptions, solve
from .svgplot import Series, write_line_plot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NEGATIVE = 2
EXIT_UNDETERMINED = 3

SEED_ENV = "LURE_CONTRACT_SEED"


def _default_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get(SEED_ENV, "0"))


def _solve_options(problem, args) -> SolveOptions:
    opts = dict(problem.solver_options)
    if args.margin_min is not None:
        opts["margin_min"] = args.margin_min
    opts.setdefault("seed", _default_seed(args))
    return SolveOptions(**opts)


def _emit(args, command, digest, status, payload, t0):
    doc = None
    if args.out:
        doc = write_report(args.out, command, digest, status, payload,
                           time.perf_counter() - t0, __version__)
    if not args.quiet:
        if doc is None:
            doc = {"command": command, "status": status,
                   **{k: v for k, v in payload.items()}}
        print(json.dumps(doc, default=lambda o: np.asarray(o).tolist(), indent=2))


def _status_exit(status: str) -> int:
    if status == FEASIBLE:
        return EXIT_OK
    if status == INFEASIBLE:
        return EXIT_NEGATIVE
    return EXIT_UNDETERMINED


def cmd_analyze(args) -> int:
    t0 = time.perf_counter()
    problem = load_problem(args.problem)
    if problem.gains is None:
        print("error: analysis requires a `gains` section in the problem file",
              file=sys.stderr)
        return EXIT_USAGE
    tag = (args.theorem if args.theorem != "auto"
           else auto_tag(problem.system, problem.nonlinearity, analysis=True))
    spec = LmiSpec(tag=tag, system=problem.system,
                   nonlinearity=problem.nonlinearity, eta=problem.eta)
    pencil = spec.build(problem.gains)
    prob = FeasibilityProblem(pencil=pencil, positivity=(("P", None),),
                              trace_normalize=("P",))
    result = solve(prob, _solve_options(problem, args))
    payload = {
        "theorem": tag,
        "eta": problem.eta,
        "P": result.witness.get("P"),
        "margin": result.margin,
        "positivity_margins": result.positivity_margins,
        "iterations": result.iterations,
    }
    _emit(args, "analyze", problem.digest, result.status, payload, t0)
    return _status_exit(result.status)


def cmd_synthesize(args) -> int:
    t0 = time.perf_counter()
    problem = load_problem(args.problem)
    tag = (args.theorem if args.theorem != "auto"
           else auto_tag(problem.system, problem.nonlinearity, analysis=False))
    spec = LmiSpec(tag=tag, system=problem.system,
                   nonlinearity=problem.nonlinearity, eta=problem.eta)
    pencil = spec.build()
    prob = FeasibilityProblem(pencil=pencil, positivity=(("W", None),))
    result = solve(prob, _solve_options(problem, args))
    payload = {
        "theorem": tag,
        "eta": problem.eta,
        "margin": result.margin,
        "iterations": result.iterations,
    }
    if result.status == FEASIBLE:
        w = result.witness["W"]
        k_psi = result.witness.get("K_psi", np.zeros((problem.system.n_u,
                                                      problem.system.n_psi)))
        gains = recover_gains(w, result.witness["Z"], k_psi)
        payload["W"] = w
        payload["K"] = gains.K
        payload["K_psi"] = gains.K_psi
        # re-audit the matching analysis inequality at P = W^{-1}
        a_tag = auto_tag(problem.system, problem.nonlinearity, analysis=True)
        a_spec = LmiSpec(tag=a_tag, system=problem.system,
                         nonlinearity=problem.nonlinearity, eta=problem.eta)
        p = linalg.inverse(w)
        a_lmax = float(linalg.eigvals_sym(
            a_spec.build(gains).evaluate({"P": p}))[-1])
        payload["P"] = p
        payload["analysis_margin"] = a_lmax
    _emit(args, "synthesize", problem.digest, result.status, payload, t0)
    return _status_exit(result.status)


def _psi_for_problem(problem, name: str):
    return get_builtin(name, n_y=problem.system.n_y, n_psi=problem.system.n_psi)


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    problem = load_problem(args.problem)
    if problem.gains is None:
        print("error: simulation requires a `gains` section in the problem file",
              file=sys.stderr)
        return EXIT_USAGE
    sim = problem.simulation_options
    steps = args.steps if args.steps is not None else int(sim.get("steps", 10))
    t_end = args.t_end if args.t_end is not None else float(sim.get("t_end", 10.0))
    dt = args.dt if args.dt is not None else float(sim.get("dt", 1e-3))
    discrete = problem.system.domain == DISCRETE
    if discrete and steps < 1:
        print("error: steps must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    psi_names = problem.builtin_psi or ("zero",)
    try:
        psis = [_psi_for_problem(problem, n) for n in psi_names]
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.pairs:
        with open(args.pairs) as fh:
            pairs = [(np.array(a, dtype=float), np.array(b, dtype=float))
                     for a, b in json.load(fh)]
    else:
        rng = np.random.default_rng(_default_seed(args))
        pairs = [(rng.uniform(-1, 1, problem.system.n_x),
                  rng.uniform(-1, 1, problem.system.n_x))]

    # measure contraction against a certificate P from the analysis solve
    tag = auto_tag(problem.system, problem.nonlinearity, analysis=True)
    spec = LmiSpec(tag=tag, system=problem.system,
                   nonlinearity=problem.nonlinearity, eta=problem.eta)
    result = solve(FeasibilityProblem(pencil=spec.build(problem.gains),
                                      positivity=(("P", None),),
                                      trace_normalize=("P",)),
                   _solve_options(problem, args))
    p = result.witness["P"] if result.status == FEASIBLE else np.eye(problem.system.n_x)

    cl = close_loop(problem.system, problem.gains)
    rate_rows = []
    series = []
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    max_ratio = -np.inf
    max_energy = -np.inf
    for pi, psi in enumerate(psis):
        for qi, (x0a, x0b) in enumerate(pairs):
            if discrete:
                t1 = simulate_dt(cl, psi, x0a, steps)
                t2 = simulate_dt(cl, psi, x0b, steps)
            else:
                t1 = simulate_ct(cl, psi, x0a, t_end, dt)
                t2 = simulate_ct(cl, psi, x0b, t_end, dt)
            rep = rate_estimate(t1, t2, p, eta=problem.eta)
            max_ratio = max(max_ratio, rep.max_ratio)
            max_energy = max(max_energy, rep.max_energy_ratio)
            rate_rows.append({"psi": psi.name, "pair": qi,
                              "max_ratio": rep.max_ratio,
                              "max_energy_ratio": rep.max_energy_ratio})
            if args.csv:
                os.makedirs(args.csv, exist_ok=True)
                write_trajectory_csv(
                    t1, os.path.join(args.csv, f"{psi.name}_pair{qi}_a.csv"))
                write_trajectory_csv(
                    t2, os.path.join(args.csv, f"{psi.name}_pair{qi}_b.csv"))
            color = palette[pi % len(palette)]
            series.append(Series(x=t1.times, y=t1.states[:, 0], color=color,
                                 dashed=False, label=f"{psi.name} a"))
            series.append(Series(x=t2.times, y=t2.states[:, 0], color=color,
                                 dashed=True, label=f"{psi.name} b"))
    if args.plot:
        write_line_plot(args.plot, series, title="First state trajectories",
                        xlabel="k" if discrete else "t", ylabel="x1")
    payload = {
        "certificate_status": result.status,
        "P": p,
        "eta": problem.eta,
        "rates": rate_rows,
        "max_ratio": float(max_ratio),
        "max_energy_ratio": float(max_energy),
    }
    _emit(args, "simulate", problem.digest, "ok", payload, t0)
    return EXIT_OK


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    problem = load_problem(args.problem)
    try:
        psi = _psi_for_problem(problem, args.psi)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sch = SampleScheme(count=args.samples, seed=_default_seed(args))
    nc = problem.nonlinearity
    if isinstance(nc, Lipschitz):
        report = check_lipschitz_incremental(psi, nc, sch)
    elif isinstance(nc, SectorBounded):
        report = check_sector_incremental(psi, nc, sch)
    elif isinstance(nc, Monotone):
        report = check_monotone(psi, nc.gamma, sch)
    else:  # pragma: no cover
        raise TypeError(f"unknown nonlinearity class {type(nc)}")
    payload = {
        "psi": psi.name,
        "verdict": report.verdict,
        "worst_margin": report.worst_margin,
        "samples": report.samples_used,
        "witness": [np.asarray(w) for w in report.witness] if report.witness else None,
    }
    _emit(args, "check", problem.digest, report.verdict, payload, t0)
    return EXIT_NEGATIVE if report.violated else EXIT_OK


def cmd_demo_paper(args) -> int:
    t0 = time.perf_counter()
    out_dir = args.out or "demo-out"
    try:
        summary = run_demo(out_dir=out_dir)
    except OSError as exc:
        print(f"error: cannot write demo output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "witness_lambda_max": summary.witness_lambda_max,
        "K": summary.gains.K,
        "K_psi": summary.gains.K_psi,
        "analysis_lambda_max": summary.analysis_lambda_max,
        "max_energy_ratio": summary.max_energy_ratio,
        "max_ratio": summary.max_ratio,
        "per_psi_max_energy": summary.per_psi_max_energy,
        "ok": summary.ok,
    }
    status = "ok" if summary.ok else "mismatch"
    if not args.quiet:
        print(json.dumps({k: np.asarray(v).tolist() if isinstance(v, np.ndarray)
                          else v for k, v in payload.items()}, indent=2,
                         default=lambda o: np.asarray(o).tolist()))
    del t0
    return EXIT_OK if summary.ok else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lurecert",
        description="Contractivity certificates for Lur'e systems",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problem=True):
        if problem:
            sp.add_argument("problem", help="problem file (JSON)")
        sp.add_argument("--out", help="write a JSON report to this path")
        sp.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV} or 0)")
        sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("analyze", help="verify a contraction certificate exists")
    common(sp)
    sp.add_argument("--theorem", default="auto", choices=("auto",) + ALL_TAGS)
    sp.add_argument("--margin-min", type=float, default=None)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("synthesize", help="design contracting controller gains")
    common(sp)
    sp.add_argument("--theorem", default="auto", choices=("auto",) + ALL_TAGS)
    sp.add_argument("--margin-min", type=float, default=None)
    sp.set_defaults(fn=cmd_synthesize)

    sp = sub.add_parser("simulate", help="simulate trajectories and measure rates")
    common(sp)
    sp.add_argument("--steps", type=int, default=None)
    sp.add_argument("--t-end", type=float, default=None)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--pairs", help="JSON file with [[x0a, x0b], ...]")
    sp.add_argument("--csv", help="directory for trajectory CSV files")
    sp.add_argument("--plot", help="path for an SVG plot of the first state")
    sp.add_argument("--margin-min", type=float, default=None)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("check", help="check a nonlinearity against its class")
    common(sp)
    sp.add_argument("--psi", required=True, help="builtin nonlinearity id")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("demo-paper",
                        help="run the bundled reference example end to end")
    common(sp, problem=False)
    sp.set_defaults(fn=cmd_demo_paper)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, linalg.DimensionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
