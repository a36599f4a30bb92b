"""Command-line entry point: ``phasefield {run,sweep,profiles,check}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .checks import run_checks
from .config import load_mapping, sim_config_from_dict, sim_config_to_dict
from .errors import ConfigError
from .experiments import EXPERIMENTS, run_experiment, spec_from_dict
from .field import write_field
from .observables import ObservationRecorder
from .profile import ProfileTable, q_prime, q_profile, solve_eta, solve_xi, write_profile_csv
from .stepper import run

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3

log = logging.getLogger("phasefield")


def _cmd_run(args) -> int:
    if args.config is None:
        raise ConfigError("cli.config", "run needs --config")
    cfg = sim_config_from_dict(load_mapping(args.config))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    recorder = ObservationRecorder(cfg)
    state = run(cfg, recorder)
    recorder.write_csv(out / "observations.csv")
    write_field(state.u, out / "final.pfmf", eps=cfg.eps, dt=cfg.dt, time=state.time, model=cfg.form.value)
    summary = {"config": sim_config_to_dict(cfg), "terminated": state.terminated,
               "time": state.time, "steps": state.step_index,
               "extinction_time": state.extinction_time, "message": state.message}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"{state.terminated} at t = {state.time:.6g} after {state.step_index} steps")
    if state.extinction_time is not None:
        print(f"extinction time {state.extinction_time:.10g}")
    if state.terminated == "degenerate":
        print(f"degenerate field: {state.message}", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.config is not None:
        data = load_mapping(args.config)
    elif args.experiment is not None:
        data = {"name": args.experiment}
    else:
        raise ConfigError("cli.config", "sweep needs --config or --experiment")
    if args.threads < 1:
        raise ConfigError("threads >= 1", f"--threads = {args.threads}")
    spec = spec_from_dict(data)
    report = run_experiment(spec, args.out, threads=args.threads)
    for (model, quantity), slope in report.slopes.items():
        print(f"{model:20s} {quantity:28s} slope {slope:.3f}")
    for cell in report.incomplete:
        print(f"incomplete: {cell.model.value} P={cell.p}: {cell.reason}", file=sys.stderr)
    if any(c.terminated == "degenerate" for c in report.cells):
        return EXIT_DEGENERATE
    return EXIT_OK


def _cmd_profiles(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eta = solve_eta(args.half_width, args.n_points)
    xi = solve_xi(args.half_width, args.n_points)
    s = eta.s_values
    q = ProfileTable(eta.domain_half_width, eta.n_points, s, q_profile(s), q_prime(s))
    for name, table in (("q", q), ("eta", eta), ("xi", xi)):
        write_profile_csv(table, out / f"{name}.csv")
    print(f"eta(+-L) = {eta.values[0]:.10g}, {eta.values[-1]:.10g}; "
          f"max|xi| = {np.max(np.abs(xi.values)):.6g}")
    return EXIT_OK


def _cmd_check(args) -> int:
    return EXIT_OK if run_checks() else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasefield", description="Allen-Cahn phase-field flows on the periodic box.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="convergence sweep over P")
    p.add_argument("--config")
    p.add_argument("--experiment", choices=[e for e in EXPERIMENTS if e != "custom"])
    p.add_argument("--out", default="sweep_out")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("profiles", help="write q, eta and xi tables")
    p.add_argument("--out", default="profiles")
    p.add_argument("--half-width", type=float, default=20.0)
    p.add_argument("--n-points", type=int, default=8001)
    p.set_defaults(func=_cmd_profiles)

    p = sub.add_parser("check", help="run the fast invariant checks")
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: invariant violated {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
