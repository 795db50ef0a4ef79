"""Command line entry point.

    itsradio list
    itsradio bands [--out DIR]
    itsradio run (--config PATH | --scenario NAME) [--seed N] [--out DIR] [--plot]
    itsradio sweep (--config PATH | --scenario NAME) [--prt LIST] [--seed N] [--out DIR] [--plot]

Failures exit nonzero with a JSON error summary on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .harness.bands import band_report, write_band_csv
from .harness.config import ConfigError, ScenarioConfig
from .harness.scenarios import ScenarioError, list_scenarios, load_scenario, run_scenario


def _load(args) -> ScenarioConfig:
    if bool(args.config) == bool(args.scenario):
        raise ConfigError("?", ["config: give exactly one of --config or --scenario"])
    cfg = ScenarioConfig.load(args.config) if args.config else load_scenario(args.scenario)
    if args.seed is not None:
        cfg.seeds = [args.seed]
    cfg.validate()
    return cfg


def cmd_list(args) -> int:
    for name in list_scenarios():
        cfg = load_scenario(name)
        print(f"{name}\t{cfg.mode}")
    return 0


def cmd_bands(args) -> int:
    rows = band_report()
    for r in rows:
        print(
            f"{r.span_mhz[0]:g}-{r.span_mhz[1]:g} MHz\tdf={r.delta_f_mhz:g} MHz\t"
            f"lambda={r.lambda_cm:g} cm\t{r.space_diversity_verdict}\t{r.remark}"
        )
    if args.out:
        path = Path(args.out) / "bands.csv"
        write_band_csv(rows, path, {"config": "bands", "seed": 0, "version": __version__})
        print(path)
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    arts = run_scenario(cfg, args.out, plot=args.plot)
    for f in arts.files:
        print(f)
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.prt:
        cfg.params["prt_values_s"] = [float(x) for x in args.prt.split(",")]
    if cfg.mode != "prt_sweep":
        cfg.mode = "prt_sweep"
    cfg.validate()
    arts = run_scenario(cfg, args.out, plot=args.plot)
    for f in arts.files:
        print(f)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="itsradio", description=__doc__.splitlines()[0] if __doc__ else None)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="bundled scenarios").set_defaults(func=cmd_list)

    b = sub.add_parser("bands", help="ISM band comparison table")
    b.add_argument("--out", help="also write bands.csv into DIR")
    b.set_defaults(func=cmd_bands)

    for name, func, helptext in (("run", cmd_run, "run one scenario"), ("sweep", cmd_sweep, "PRT sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--scenario", help="bundled scenario name")
        p.add_argument("--seed", type=int, help="run only this seed")
        p.add_argument("--out", help="output directory (default: config output_path)")
        p.add_argument("--plot", action="store_true", help="render PNG figures next to the CSVs")
        if name == "sweep":
            p.add_argument("--prt", help="comma-separated PRT values in seconds")
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError) as exc:
        print(json.dumps(exc.as_dict(), sort_keys=True), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
