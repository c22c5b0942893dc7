"""``leadtime-lab`` command line: ``run`` and ``simulate`` subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .composition import write_panel
from .errors import InvalidConfig, InvalidSpec
from .pipeline import ANALYSIS_STAGES, EXIT_INPUT, RunConfig, run
from .synth import generate_panel, load_scenario


def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _stages(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leadtime-lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run analysis stages on a panel CSV")
    r.add_argument("--input", type=Path, help="panel CSV (date,lead,nights_share,gbv_share)")
    r.add_argument("--output", type=Path, required=True, help="output directory")
    r.add_argument("--stages", type=_stages, default=ANALYSIS_STAGES,
                   help="comma-separated subset of simulate,divergence,breaks,tails,gpd,fit,smooth,score")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--tail-thresholds", type=_ints, default=(7, 30, 60, 90, 180))
    r.add_argument("--gpd-thresholds", type=_ints, default=(60, 90, 120, 150, 180, 210, 240, 270))
    r.add_argument("--replicates", type=int, default=1000, help="bootstrap replicates")
    r.add_argument("--max-breaks", type=int, default=5)
    r.add_argument("--trim", type=float, default=0.05)
    r.add_argument("--draws-per-day", type=int, default=1000)
    r.add_argument("--no-jitter", action="store_true", help="draw integer leads for GPD fits")
    r.add_argument("--null-draws", type=int, default=999, help="simulated sup-F null size")
    r.add_argument("--scenario", type=Path, help="scenario JSON for the simulate stage")
    r.add_argument("--lenient", action="store_true",
                   help="drop rows with leads beyond 365 (with a warning) instead of failing")

    s = sub.add_parser("simulate", help="write a synthetic panel from a scenario JSON")
    s.add_argument("--scenario", type=Path, required=True)
    s.add_argument("--output", type=Path, required=True, help="panel CSV to write")
    s.add_argument("--seed", type=int, default=None, help="overrides the scenario seed")
    return p


def _run(args) -> int:
    cfg = RunConfig(
        input_path=args.input,
        output_dir=args.output,
        stages=args.stages,
        seed=args.seed,
        tail_thresholds=args.tail_thresholds,
        gpd_thresholds=args.gpd_thresholds,
        bootstrap_replicates=args.replicates,
        max_breaks=args.max_breaks,
        trim=args.trim,
        draws_per_day=args.draws_per_day,
        jitter=not args.no_jitter,
        null_draws=args.null_draws,
        scenario_path=args.scenario,
        strict=not args.lenient,
    )
    result = run(cfg)
    for line in result.diagnostics:
        print(line, file=sys.stderr)
    if result.failed_stage:
        print(f"stage failed: {result.failed_stage}", file=sys.stderr)
    return result.status


def _simulate(args) -> int:
    try:
        spec = load_scenario(args.scenario, seed=args.seed)
        write_panel(generate_panel(spec), args.output)
    except InvalidSpec as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(args)
        return _simulate(args)
    except InvalidConfig as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
