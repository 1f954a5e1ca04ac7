"""Command-line entry point: ``xyqst {trace,metrics,sweep,fit,oracle-check}``.

Exit codes: 0 on success (including "no advantage within the horizon"),
2 for invalid configuration, 1 for computation or I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .fidelity import fidelity_trace, fidelity_at, write_trace_csv
from .fitting import fit_scaling, read_points_csv, write_fit_json
from .freefermion import diagonalize
from .metrics import FOUND, evaluate, write_records_csv
from .model import InvalidModelError, ModelParams, build_quadratic_form

EXIT_OK, EXIT_FAILURE, EXIT_INVALID = 0, 1, 2

_FLAG_KEYS = {
    "n_sites": "--n-sites", "coordination": "--coordination", "falloff": "--falloff",
    "anisotropy": "--anisotropy", "field": "--field", "coupling_scale": "--coupling-scale",
    "epsilon": "--epsilon", "t_max": "--t-max", "dt": "--dt",
    "outputs": "--outputs", "time_budget": "--time-budget", "cache_dir": "--cache-dir",
    "input": "--input", "fix_a": "--fix-a", "samples": "--samples", "seed": "--seed",
    "randomize": "--randomize",
}


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subparser from resetting flags given before the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--parallelism", help="worker processes for sweeps ('max' for all cores)")
    common.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any configuration key")
    for key, flag in _FLAG_KEYS.items():
        common.add_argument(flag, dest=key)
    common.add_argument("--axis", action="append", metavar="NAME=VALUES",
                        help="sweep axis, e.g. z=1:24 or alpha=0.5,1.5,2.5")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="xyqst", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"xyqst {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trace", parents=[common], help="fidelity trace as t,p,q,f CSV")
    sub.add_parser("metrics", parents=[common], help="t_q, f* and t* for one parameter set")
    sub.add_parser("sweep", parents=[common], help="metrics over a parameter grid")
    sub.add_parser("fit", parents=[common], help="fit f*(N) = a exp(-b N^eta)")
    sub.add_parser("oracle-check", parents=[common], help="compare against dense exact simulation")
    return parser


def load_config(args) -> RunConfig:
    config_path = getattr(args, "config", None)
    cfg = RunConfig.from_file(config_path) if config_path else RunConfig()
    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg.set(key, value)
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        cfg.set(key.strip(), value)
    for item in getattr(args, "axis", []):
        if "=" not in item:
            raise ConfigError(f"--axis expects NAME=VALUES, got {item!r}")
        name, value = item.split("=", 1)
        cfg.set(f"axis.{name.strip()}", value)
    if getattr(args, "out", None) is not None:
        cfg.set("out", args.out)
    if getattr(args, "parallelism", None) is not None:
        cfg.set("parallelism", "0" if args.parallelism == "max" else args.parallelism)
    return cfg


def provenance(cfg: RunConfig, command: str) -> dict:
    return {"tool": "xyqst", "version": __version__, "command": command, "config_hash": cfg.config_hash()}


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)


def _write_sidecar(out, prov: dict) -> None:
    if out is not None:
        Path(str(out) + ".provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")


def cmd_trace(cfg: RunConfig) -> int:
    params = cfg.model_params()
    mc = cfg.metrics_config()
    trace = fidelity_trace(params, mc.horizon(params), mc.dt)
    out = cfg["out"]
    if out is None:
        write_trace_csv(trace, sys.stdout)
    else:
        write_trace_csv(trace, out)
        _write_sidecar(out, provenance(cfg, "trace"))
    return EXIT_OK


def cmd_metrics(cfg: RunConfig) -> int:
    params = cfg.model_params()
    record = evaluate(params, cfg.metrics_config(), outputs=tuple(cfg["outputs"]))
    if record.status == FOUND:
        summary = f"t_q = {record.t_q:.6g}"
        if record.f_star is not None:
            summary += f", f* = {record.f_star:.6g} at t* = {record.t_star:.6g}"
    else:
        summary = f"no advantage within t_max = {cfg.metrics_config().horizon(params):g}"
    print(f"{params}: {summary}", file=sys.stderr)
    payload = {"provenance": provenance(cfg, "metrics"), "record": record.as_json()}
    _write_text(json.dumps(payload, indent=2) + "\n", cfg["out"])
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    from .sweep import SweepGrid, export, run_sweep

    grid = SweepGrid.from_run_config(cfg)
    result = run_sweep(grid, parallelism=cfg["parallelism"] or "max", cache_dir=cfg["cache_dir"])
    out = cfg["out"]
    if out is None:
        write_records_csv(result.records, sys.stdout)
    else:
        fmt = "jsonl" if str(out).endswith(".jsonl") else "csv"
        export(result, out, fmt)
        if fmt == "csv":
            _write_sidecar(out, {**provenance(cfg, "sweep"), **result.provenance})
    counts = {}
    for rec in result.records:
        counts[rec.status] = counts.get(rec.status, 0) + 1
    print(f"{len(result.records)} cells: {counts}", file=sys.stderr)
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    if cfg["input"] is None:
        raise ConfigError("fit needs an input CSV (key 'input')")
    result = fit_scaling(read_points_csv(cfg["input"]), fix_a_to_one=cfg["fix_a"])
    prov = provenance(cfg, "fit")
    if cfg["out"] is None:
        sys.stdout.write(json.dumps({"provenance": prov, **result.as_dict()}, indent=2, sort_keys=True) + "\n")
    else:
        write_fit_json(result, cfg["out"], prov)
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    from .oracle import MAX_SITES, DegenerateGroundStateError, protocol_fidelity

    base = cfg.model_params()
    n = base.n_sites
    if n > MAX_SITES:
        raise ConfigError(f"n_sites: oracle-check supports at most {MAX_SITES} sites, got {n}")
    rng = np.random.default_rng(cfg["seed"])
    rows, skipped = [], 0
    while len(rows) < cfg["samples"]:
        if cfg["randomize"]:
            params = ModelParams(n, int(rng.integers(1, n)), float(rng.uniform(0.5, 3.0)),
                                 float(rng.uniform(0.0, 1.3)), float(rng.uniform(-2.0, 2.0)))
        else:
            params = base
        t = float(rng.uniform(0.0, 3.0 * n))
        try:
            oracle_f = protocol_fidelity(params, t)
        except DegenerateGroundStateError:
            skipped += 1
            if skipped > 100:
                raise
            continue
        ff = float(fidelity_at(diagonalize(build_quadratic_form(params)), [t])[0])
        rows.append({"params": params.as_dict(), "t": t, "free_fermion_f": ff, "oracle_f": oracle_f,
                     "abs_deviation": abs(ff - oracle_f)})
    report = {
        "provenance": provenance(cfg, "oracle-check"),
        "samples": rows,
        "skipped_degenerate": skipped,
        "max_deviation": max(r["abs_deviation"] for r in rows),
    }
    print(f"max |f_free - f_oracle| = {report['max_deviation']:.3e} over {len(rows)} samples", file=sys.stderr)
    _write_text(json.dumps(report, indent=2) + "\n", cfg["out"])
    return EXIT_OK


COMMANDS = {"trace": cmd_trace, "metrics": cmd_metrics, "sweep": cmd_sweep, "fit": cmd_fit,
            "oracle-check": cmd_oracle_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if getattr(args, "dump_config", False):
            sys.stdout.write(cfg.dump())
            return EXIT_OK
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidModelError) as exc:
        print(f"xyqst: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"xyqst: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BrokenPipeError:
        # downstream reader (e.g. `head`) closed early; not an error
        sys.stderr.close()
        return EXIT_OK
    except (OSError, RuntimeError, ArithmeticError) as exc:
        print(f"xyqst: failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
