"""Command-line entry point ``simulate``.

Exit codes: 0 success, 2 config error, 3 non-convergence, 4 capacity
exceeded, 5 spectral decomposition unreliable under ``--solver spectral``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import SCHEMA, load_config
from .errors import ConfigError, SimulationError
from .experiments import fmt, run_experiment
from .lindblad import build_liouvillian, spectral_decompose
from .presets import PRESETS, get_preset, list_presets


def _print_summary(summary: dict):
    for run in summary["runs"]:
        parts = [f"csv={run['csv']}", f"solver={run.get('solver_path')}"]
        for key in ("terminal_state", "coercive_field", "time_average_deviation", "max_steady_state_residual"):
            if key in run:
                parts.append(f"{key}={json.dumps(run[key], default=lambda a: a.tolist())}")
        print("  ".join(parts))
    print(f"wall time {summary['wall_time_s']:.2f} s")


def cmd_run(args):
    config = load_config(args.config)
    if args.solver:
        config = dataclasses.replace(config, solver=args.solver)
    _print_summary(run_experiment(config, args.out))


def cmd_preset(args):
    try:
        preset = get_preset(args.id)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]), field="preset") from None
    config = preset.config()
    if args.solver:
        config = dataclasses.replace(config, solver=args.solver)
    out = Path(args.out) / preset.id if args.out else None
    _print_summary(run_experiment(config, out))


def cmd_presets(args):
    for row in list_presets():
        print(f"{row['id']:<14} {row['kind']:<13} N={row['n_sites']:<4} B={row['b_field']} V={row['couplings']} "
              f"Gamma={row['gamma']} sweep={row['sweep'] and row['sweep']['param']}")
        print(f"{'':<14} {row['source']}")


def cmd_spectrum(args):
    config = load_config(args.config)
    spectrum = spectral_decompose(build_liouvillian(config.chain_model()))
    print("k,re,im")
    for k, lam in enumerate(spectrum.eigenvalues, start=1):
        print(f"{k},{fmt(lam.real)},{fmt(lam.imag)}")


def cmd_schema(args):
    print(json.dumps(SCHEMA, indent=2))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate", description="Open Heisenberg chain simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", help="output path stem (overrides output_path)")
    p.add_argument("--solver", choices=["rk4", "spectral", "auto"])
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("id", help=", ".join(PRESETS))
    p.add_argument("--out", help="output directory")
    p.add_argument("--solver", choices=["rk4", "spectral", "auto"])
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("presets", help="list presets and their parameters")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("spectrum", help="print the Liouvillian eigenvalues of a config's model")
    p.add_argument("config")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("schema", help="print the JSON schema for config files")
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
