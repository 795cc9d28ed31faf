"""Command-line front end.

    zklab [--config PATH] [--out DIR] [--threads N] [--seed U64] SUBCOMMAND [options]

Subcommands: poisson, simulate, zk, profiles, consistency, converge,
alpha-limit, dispersion. Each writes its CSV (and field dumps where
relevant) plus ``summary.json`` into the output directory. The exit code
is 0 when every pass/fail gate passed, 1 when some gate failed, 2 on bad
usage or configuration and 3 when a solver error aborted the run.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import __version__
from .errors import ConfigError, ZKLabError
from .experiments import (
    ExperimentConfig,
    config_from_dict,
    csv_text,
    emit_config,
    gaussian_profile,
    parse_config,
    run_alpha_limit,
    run_consistency,
    run_convergence,
    run_dispersion,
    run_poisson,
    run_simulate,
    run_zk,
)
from .grid import load_field, save_field
from .poisson import SolverConfig, monotone_solve, solve_scaled, solve_unscaled
from .profiles import PROFILE_NAMES, build_profiles, order12_cancellation_check

# subcommand flag -> config key
_OVERRIDES = {
    "dim": int,
    "points": int,
    "lengths": float,
    "eps": float,
    "a": float,
    "alpha": float,
    "c0": float,
    "eps_list": float,
    "alpha_list": float,
    "T1": float,
    "s": float,
    "amplitude": float,
    "width": float,
    "initial": str,
    "horizon": float,
    "dt": float,
    "dT": float,
    "t_star": float,
    "t_fit": float,
    "T_star": float,
    "solver": str,
    "tol": float,
    "samples": int,
    "k_max": float,
    "k_count": int,
    "a_list": float,
    "snapshot_every": int,
}
_LISTS = {"points", "lengths", "eps_list", "alpha_list", "t_star", "a_list"}

_SUBCOMMAND_FLAGS = {
    "poisson": ["dim", "points", "lengths", "eps", "tol", "solver", "samples", "amplitude", "width"],
    "simulate": ["dim", "points", "lengths", "eps", "a", "alpha", "c0", "dt", "horizon",
                 "snapshot_every", "initial", "amplitude", "width", "s", "tol"],
    "zk": ["dim", "points", "lengths", "a", "alpha", "dT", "T1", "initial", "amplitude", "width"],
    "profiles": ["dim", "points", "lengths", "a", "alpha", "amplitude", "width"],
    "consistency": ["dim", "points", "lengths", "a", "alpha", "eps_list", "T1", "dT",
                    "amplitude", "width"],
    "converge": ["dim", "points", "lengths", "a", "eps_list", "t_star", "t_fit", "T_star",
                 "s", "dt", "dT", "amplitude", "width"],
    "alpha-limit": ["dim", "points", "lengths", "eps", "a", "alpha_list", "t_fit", "dt",
                    "amplitude", "width"],
    "dispersion": ["k_max", "k_count", "a_list"],
}


def build_parser():
    parser = argparse.ArgumentParser(prog="zklab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    parser.add_argument("--seed", type=int, help="seed for random data (unsigned 64-bit)")
    parser.add_argument("--version", action="version", version=f"zklab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in _SUBCOMMAND_FLAGS.items():
        p = sub.add_parser(name)
        for key in flags:
            kind = _OVERRIDES[key]
            opt = "--" + key.replace("_", "-")
            if key in _LISTS:
                p.add_argument(opt, dest=key, type=kind, nargs="+")
            else:
                p.add_argument(opt, dest=key, type=kind)
        if name in ("poisson", "simulate", "zk", "profiles"):
            p.add_argument("--input", type=Path, help="ZKF1 field dump used as initial data")
        if name == "poisson":
            p.add_argument("--output", type=Path, help="write the potential as a ZKF1 dump")
    return parser


def _config(args):
    data = {}
    if args.config is not None:
        data = dataclasses.asdict(parse_config(args.config))
    for key in _OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    data["experiment"] = args.command
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["out"] = str(args.out)
    return config_from_dict(data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_summary(out, command, cfg, summary, gates, extra=None):
    record = {
        "command": command,
        "version": __version__,
        "passed": bool(all(gates.values())),
        "gates": gates,
        "summary": summary,
        "config": dataclasses.asdict(cfg),
    }
    if extra:
        record.update(extra)
    (out / "summary.json").write_text(json.dumps(_jsonable(record), sort_keys=True, indent=2) + "\n")


def _load_input(args, cfg):
    if getattr(args, "input", None) is None:
        return None
    grid, f = load_field(args.input)
    if grid != cfg.grid():
        raise ConfigError(f"input grid {grid} differs from configured grid {cfg.grid()}", "input")
    return f


def _cmd_poisson(args, cfg, out):
    field = _load_input(args, cfg)
    if field is None:
        res = run_poisson(cfg)
        for row in res.rows:
            print(json.dumps(_jsonable(dict(zip(res.header, row)))))
        (out / "poisson.csv").write_text(csv_text(res.header, res.rows, cfg))
        return res.summary, res.gates
    g = cfg.grid()
    sc = SolverConfig(tol=cfg.tol)
    if cfg.solver == "monotone":
        if cfg.eps != 1.0:
            raise ConfigError("the monotone solver handles the unscaled equation only", "eps")
        phi, d = monotone_solve(g, field, sc)
    elif cfg.eps == 1.0:
        phi, d = solve_unscaled(g, field, sc)
    else:
        phi, d = solve_scaled(g, field, cfg.eps, sc)
    record = d.as_record()
    print(json.dumps(_jsonable(record)))
    if args.output is not None:
        save_field(args.output, g, phi)
    gates = {"converged": d.residual <= cfg.tol}
    if d.bounds_apply and cfg.eps == 1.0:
        gates["bounds"] = d.bound_lo - phi.min() <= 1e-10 and phi.max() - d.bound_hi <= 1e-10
        gates["energy"] = d.energy_lhs - 0.5 * d.I1 <= 1e-8
    return record, gates


def _cmd_simulate(args, cfg, out):
    res = run_simulate(cfg, _load_input(args, cfg))
    (out / "conservation.csv").write_text(csv_text(res.header, res.rows, cfg))
    g = cfg.grid()
    for i, (t, snap) in enumerate(sorted(res.snapshots.items())):
        save_field(out / f"n_{i:04d}.zkf", g, snap.n)
    save_field(out / "n_final.zkf", g, res.final.n)
    return res.summary, res.gates


def _cmd_zk(args, cfg, out):
    res = run_zk(cfg, _load_input(args, cfg))
    (out / "invariants.csv").write_text(csv_text(res.header, res.rows, cfg))
    save_field(out / "n1_final.zkf", cfg.grid(), res.trajectory.final.n1)
    return res.summary, res.gates


def _cmd_profiles(args, cfg, out):
    g = cfg.grid()
    n1 = _load_input(args, cfg)
    if n1 is None:
        n1 = gaussian_profile(g, cfg.amplitude, cfg.width)
    p = build_profiles(g, n1, cfg.a, cfg.alpha)
    for name in PROFILE_NAMES:
        save_field(out / f"{name}.zkf", g, getattr(p, name))
    check = order12_cancellation_check(p)
    rows = sorted(check["values"].items())
    (out / "cancellation.csv").write_text(csv_text(("combination", "relative_norm"), rows, cfg))
    return {"cancellation": check["values"], "failed": check["failed"]}, {"cancellation": check["passed"]}


def _cmd_table(runner, filename):
    def cmd(args, cfg, out):
        res = runner(cfg)
        (out / filename).write_text(csv_text(res.header, res.rows, cfg))
        return res.summary, res.gates

    return cmd


COMMANDS = {
    "poisson": _cmd_poisson,
    "simulate": _cmd_simulate,
    "zk": _cmd_zk,
    "profiles": _cmd_profiles,
    "consistency": _cmd_table(run_consistency, "consistency.csv"),
    "converge": _cmd_table(run_convergence, "convergence.csv"),
    "alpha-limit": _cmd_table(run_alpha_limit, "alpha_limit.csv"),
    "dispersion": _cmd_table(run_dispersion, "dispersion.csv"),
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"zklab: configuration error: {exc}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("zklab: --threads must be >= 1", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(emit_config(cfg))
    try:
        with sfft.set_workers(args.threads):
            summary, gates = COMMANDS[args.command](args, cfg, out)
    except ConfigError as exc:
        print(f"zklab: configuration error: {exc}", file=sys.stderr)
        return 2
    except ZKLabError as exc:
        write_summary(out, args.command, cfg, {"error": f"{type(exc).__name__}: {exc}"}, {"ran": False})
        print(f"zklab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    write_summary(out, args.command, cfg, summary, gates, {"threads": args.threads})
    for name, ok in gates.items():
        print(f"{'PASS' if ok else 'FAIL'} {args.command}:{name}")
    return 0 if all(gates.values()) else 1


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "ExperimentConfig"]
