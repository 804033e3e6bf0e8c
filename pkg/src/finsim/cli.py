"""``finsim`` command line: run scenarios, list them.

Exit codes: 0 success, 1 configuration error, 2 simulation error, 3 I/O error.
Failures print one line on stderr: ``finsim: error=<kind> exit=<code> message="..."``.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ScenarioConfig, format_config, load_config, parse_config
from .errors import ConfigError, FinsimError, OutputError, SimulationError
from .scenarios import SCENARIOS, resolve_t_end, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_SIMULATION, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finsim", description="Two-motor fish tail simulator")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("scenario", help="scenario name (see 'finsim list')")
    run.add_argument("--config", help="key = value configuration file")
    run.add_argument("--out", help="output directory (overrides scenario.output_path)")
    run.add_argument("--t-end", type=float, help="simulated duration in seconds")
    run.add_argument("--dt", type=float, help="time step in seconds")
    run.add_argument("--sweep", metavar="KEY=V1,V2,...",
                     help="run one variant per value of a config key, each in its own subdirectory")
    sub.add_parser("list", help="list scenarios")
    return parser


def with_settings(cfg: ScenarioConfig, settings: dict, source: str = "<command line>") -> ScenarioConfig:
    """Re-parse ``cfg`` with some ``section.key`` values replaced."""
    lines = dict(line.split(" = ", 1) for line in format_config(cfg).splitlines())
    for key, value in settings.items():
        if key not in lines:
            raise ConfigError(f"{source}: unknown key {key!r}")
        lines[key] = value
    return parse_config("\n".join(f"{k} = {v}" for k, v in lines.items()), source)


def _variants(cfg: ScenarioConfig, sweep: str | None, out: Path):
    if not sweep:
        return [(cfg, out)]
    key, sep, values = sweep.partition("=")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not sep or not items:
        raise ConfigError(f"--sweep expects KEY=V1,V2,... (got {sweep!r})")
    key = key.strip()
    return [(with_settings(cfg, {key: v}, f"--sweep {key}"), out / f"{key}={v}") for v in items]


def _run_one(args):
    cfg, out = args
    return run_scenario(cfg, out)


def _exit_for(exc: BaseException) -> tuple[str, int]:
    if isinstance(exc, ConfigError):
        return "config", EXIT_CONFIG
    if isinstance(exc, (OutputError, OSError)):
        return "io", EXIT_IO
    return "simulation", EXIT_SIMULATION


def _report(exc: BaseException) -> int:
    kind, code = _exit_for(exc)
    message = " ".join(str(exc).split()).replace('"', "'")
    print(f'finsim: error={kind} exit={code} message="{message}"', file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "list":
            for scenario in SCENARIOS.values():
                print(f"{scenario.name:14s} {scenario.description}")
            return EXIT_OK
        if args.command != "run":
            raise ConfigError("usage: finsim {run,list} ...")

        cfg = load_config(args.config) if args.config else ScenarioConfig()
        settings = {"scenario.name": args.scenario}
        if args.t_end is not None:
            settings["scenario.t_end_s"] = repr(args.t_end)
        if args.dt is not None:
            settings["scenario.dt_s"] = repr(args.dt)
        if args.out is not None:
            settings["scenario.output_path"] = args.out
        cfg = with_settings(cfg, settings)
        variants = _variants(cfg, args.sweep, Path(cfg.output_path))
        # validate everything before the first simulation starts
        for variant, _ in variants:
            resolve_t_end(variant)

        if len(variants) == 1:
            results = [_run_one(variants[0])]
        else:
            with ProcessPoolExecutor(max_workers=min(len(variants), 4)) as pool:
                results = list(pool.map(_run_one, variants))
        for result in results:
            print(result.out_dir / "manifest.txt")
        return EXIT_OK
    except (FinsimError, OSError) as exc:
        return _report(exc)
    except (ValueError, ArithmeticError) as exc:
        return _report(SimulationError(str(exc)))


if __name__ == "__main__":
    sys.exit(main())
