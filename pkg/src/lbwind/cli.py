"""Command line entry point.

    lbwind run <config.yaml>        execute the configured simulation
    lbwind run --validate <config>  parse + validate only, then exit
    lbwind report <config.yaml>     print the roofline numbers for the
                                    configured kernel and machine (no
                                    simulation, no field allocation)

Exit codes: 0 success, 2 configuration error, 3 numerical abort (NaN).
The LBWIND_WORKERS environment variable overrides run.workers.
"""

import argparse
import json
import os
import sys

import numpy as np

from .config import parse_config
from .errors import ConfigError, NumericalAbort
from .roofline import (estimated_peak_mlups, lbm_kernel_cost, lightspeed,
                       percent_table_row)


def roofline_report(cfg):
    """Roofline numbers from the config alone: kernel cost, estimated
    MLUPS ceiling, lightspeed, and percent-of-peak for a reference
    measurement if one is given."""
    cost = lbm_kernel_cost(
        precision_bytes=np.dtype(cfg.dtype).itemsize, n_f=cfg.kernel_flops())
    out = {"kernel": dict(cost.to_dict(), operator=cfg.operator,
                          precision=cfg.precision)}
    if cfg.machine is not None:
        m = cfg.machine.to_dict()
        m["estimated_peak_mlups"] = estimated_peak_mlups(cfg.machine, cost)
        ls = lightspeed(cfg.machine, cost)
        if ls is not None:
            m["lightspeed"] = ls
        if cfg.reference_mlups is not None:
            m.update(percent_table_row(cfg.reference_mlups, cfg.machine,
                                       cost))
        out["machine"] = m
    return out


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lbwind",
        description="lattice-Boltzmann wind-turbine wake simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a configured simulation")
    run.add_argument("config", help="YAML run configuration")
    run.add_argument("--validate", action="store_true",
                     help="parse and validate the config, then exit")
    rep = sub.add_parser("report",
                         help="roofline numbers only, no simulation")
    rep.add_argument("config", help="YAML run configuration")
    rep.add_argument("--validate", action="store_true",
                     help="parse and validate the config, then exit")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        workers = os.environ.get("LBWIND_WORKERS")
        if workers is not None:
            try:
                cfg.workers = int(workers)
            except ValueError:
                raise ConfigError(
                    f"LBWIND_WORKERS: not an integer: {workers!r}")
            if cfg.workers < 1:
                raise ConfigError("LBWIND_WORKERS: must be >= 1")
        if args.validate:
            print(f"config OK: {args.config}")
            return 0
        if args.command == "report":
            print(json.dumps(roofline_report(cfg), indent=2, sort_keys=True))
            return 0
        from .sim import run_simulation
        report = run_simulation(cfg)
        perf = report["performance"]
        if "mlups" in perf:
            print(f"{cfg.name}: {perf['steps']} steps, "
                  f"{perf['wall_seconds']:.3f}s, {perf['mlups']:.2f} MLUPS")
        else:
            print(f"{cfg.name}: {perf['steps']} steps")
        print(f"report: {os.path.join(cfg.output_dir, 'report.json')}")
        return 0
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except NumericalAbort as e:
        print(f"numerical abort: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
