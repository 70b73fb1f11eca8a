"""
Command-line interface for the friction estimation toolkit.

Subcommands:
  simulate       Run a scenario and write trace CSVs
  estimate       Run the estimator on trace files
  report         Aggregate estimate runs into a statistics table
  limit-surface  Export a normalized limit-surface sweep
"""
import argparse
import glob
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, config
from .contact_model import parse_distribution, sweep_limit_surface, write_sweep_csv
from .estimator import FrictionEstimator, read_estimates_csv, write_estimates_csv
from .exceptions import ConfigurationError, FrictionToolError
from .ingest import ALIGN_METHODS, align, load_trace, read_truth, trace_paths, write_trace
from .simulator import (
    SimConfig,
    make_heuristic_batch_config,
    make_heuristic_batch_scenario,
    make_paper_like_scenario,
    run_scenario,
    sim_config_from_mapping,
)
from .stats import (
    WindowInterval,
    WindowRule,
    aggregate,
    condition_label,
    render_report_table,
    summarize_trial,
    write_report,
)
from .utils.general import get_output_path, read_manifest, write_manifest
from .utils.logging_utils import setup_logger

logger = logging.getLogger(__name__)

SIMULATE_MANIFEST = "simulate_manifest.yaml"
ESTIMATE_MANIFEST = "estimate_manifest.yaml"
ESTIMATES_SUFFIX = "_estimates.csv"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def _manifest(command: str, args: argparse.Namespace, **extra: Any) -> Dict[str, Any]:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "out_dir": str(args.out_dir),
    }
    manifest.update(extra)
    return manifest


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Per-trial seeds spawned from one base seed; a single trial uses the seed itself."""
    if trials == 1:
        return [seed]
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1)[0]) for child in children]


def _scenario_from_args(args: argparse.Namespace, overrides: Dict[str, str]) -> Tuple[list, SimConfig, str]:
    if args.paper_like:
        return make_paper_like_scenario(), sim_config_from_mapping(overrides, "--set"), "paper-like"
    if args.heuristic_batch:
        base = make_heuristic_batch_config().to_dict()
        base.update(overrides)
        return make_heuristic_batch_scenario(), sim_config_from_mapping(base, "--set"), "heuristic-batch"
    if not args.scenario:
        raise ConfigurationError("Give a scenario file, --paper-like or --heuristic-batch", key="scenario")
    segments, sim_config = config.load_scenario(args.scenario, overrides)
    return segments, sim_config, str(args.scenario)


def cmd_simulate(args: argparse.Namespace) -> int:
    """Simulate one or more trials of a scenario."""
    overrides = config.parse_overrides(args.set)
    segments, sim_config, source = _scenario_from_args(args, overrides)
    if args.trials < 1:
        raise ConfigurationError("--trials must be at least 1", key="trials")

    if args.seed is not None:
        seed = args.seed
    elif args.scenario or "seed" in overrides:
        seed = sim_config.seed
    else:
        seed = config.get_default_seed()
    seeds = trial_seeds(seed, args.trials)
    names = [args.name] if args.trials == 1 else [f"{args.name}_{i:03d}" for i in range(args.trials)]

    for name, trial_seed in zip(names, seeds):
        sim_config.seed = trial_seed
        trace = run_scenario(segments, sim_config)
        prefix = get_output_path(args.out_dir, name, "")
        write_trace(trace, prefix)
        logger.info("Trial %s (seed %d) written to %s", name, trial_seed, args.out_dir)

    sim_config.seed = seed
    write_manifest(
        Path(args.out_dir) / SIMULATE_MANIFEST,
        _manifest(
            "simulate", args,
            scenario=source,
            overrides=dict(overrides),
            seed=seed,
            trials={name: s for name, s in zip(names, seeds)},
            config=sim_config.to_dict(),
        ),
    )
    return EXIT_OK


def cmd_estimate(args: argparse.Namespace) -> int:
    """Run the estimator on each trace prefix."""
    overrides: Dict[str, Any] = dict(config.parse_overrides(args.set))
    if args.no_heuristic:
        overrides["heuristic_enabled"] = False
    params = config.load_estimator_params(args.params, overrides)

    outputs = {}
    for prefix in args.trace_prefix:
        raw = load_trace(prefix)
        measurements = align(raw, params.delta_t, method=args.align)
        records = FrictionEstimator(params).run(measurements)

        truth_path = trace_paths(prefix)["truth"]
        truth = read_truth(truth_path) if truth_path.exists() else None
        name = Path(str(prefix)).name
        out_path = get_output_path(args.out_dir, name, ESTIMATES_SUFFIX)
        write_estimates_csv(records, out_path, truth)
        outputs[name] = str(out_path)
        logger.info("Estimates for %s written to %s", prefix, out_path)

    write_manifest(
        Path(args.out_dir) / ESTIMATE_MANIFEST,
        _manifest(
            "estimate", args,
            inputs=[str(p) for p in args.trace_prefix],
            params_path=str(args.params) if args.params else None,
            overrides={k: str(v) for k, v in overrides.items()},
            params=config.estimator_params_to_mapping(params),
            heuristic=params.heuristic_enabled,
            label=args.label,
            align=args.align,
            outputs=outputs,
        ),
    )
    return EXIT_OK


def _collect_runs(pattern: str) -> List[Path]:
    runs = sorted(Path(p) for p in glob.glob(pattern) if (Path(p) / ESTIMATE_MANIFEST).exists())
    if not runs:
        raise FileNotFoundError(f"No estimate runs match '{pattern}'")
    return runs


def cmd_report(args: argparse.Namespace) -> int:
    """Aggregate estimate runs grouped by label and heuristic setting."""
    window = WindowRule(interval=WindowInterval(args.window))
    groups: Dict[Tuple[str, bool], list] = {}
    runs = _collect_runs(args.run_glob)
    for run in runs:
        manifest = read_manifest(run / ESTIMATE_MANIFEST)
        key = (manifest.get("label") or run.name, bool(manifest.get("heuristic", True)))
        for estimates in sorted(run.glob(f"*{ESTIMATES_SUFFIX}")):
            records = read_estimates_csv(estimates)
            groups.setdefault(key, []).append(summarize_trial(records, window, trial_id=estimates.stem))

    rows = [
        (condition_label(label, heuristic), aggregate(groups[(label, heuristic)]))
        for label, heuristic in sorted(groups)
    ]
    write_report(render_report_table(rows), args.out)
    write_manifest(
        Path(args.out).with_suffix(".manifest.yaml"),
        {
            "command": "report",
            "tool_version": __version__,
            "run_glob": args.run_glob,
            "runs": [str(run) for run in runs],
            "window": args.window,
            "out": str(args.out),
        },
    )
    return EXIT_OK


def cmd_limit_surface(args: argparse.Namespace) -> int:
    """Sweep the numeric limit surface of a pressure distribution."""
    dist = parse_distribution(args.dist)
    points = sweep_limit_surface(dist, args.n_dirs, args.resolution)
    write_sweep_csv(points, args.out)
    write_manifest(
        Path(args.out).with_suffix(".manifest.yaml"),
        {
            "command": "limit-surface",
            "tool_version": __version__,
            "dist": args.dist,
            "n_dirs": args.n_dirs,
            "resolution": args.resolution,
            "out": str(args.out),
        },
    )
    logger.info("Wrote %d sweep points for %s to %s", len(points), dist.describe(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="friction-est",
        description="In-hand friction estimation toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''Examples:
  friction-est simulate --paper-like --out-dir runs/sim
  friction-est estimate runs/sim/trial --out-dir runs/est --label disc
  friction-est estimate runs/sim/trial --no-heuristic --out-dir runs/est_nh --label disc
  friction-est report "runs/est*" --out runs/report.csv
  friction-est limit-surface --dist uniform:0.015 --out runs/ls.csv
''',
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--log-file", help="Also log to this rotating file")

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    sim = subparsers.add_parser("simulate", help="Simulate a scenario")
    sim.add_argument("scenario", nargs="?", help="Scenario YAML file")
    sim.add_argument("--paper-like", action="store_true", help="Use the built-in five-segment scenario")
    sim.add_argument("--heuristic-batch", action="store_true", help="Use the built-in spike-injected linear slip")
    sim.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a simulation config field")
    sim.add_argument("--seed", type=int, help="Base seed (default: scenario seed or FRICTION_SEED)")
    sim.add_argument("--trials", type=int, default=1, help="Number of trials (default: 1)")
    sim.add_argument("--name", default="trial", help="Trace file prefix (default: trial)")
    sim.add_argument("--out-dir", default="output", help="Output directory (default: output)")
    sim.set_defaults(handler=cmd_simulate)

    est = subparsers.add_parser("estimate", help="Estimate friction from traces")
    est.add_argument("trace_prefix", nargs="+", help="Trace prefix(es), e.g. output/trial")
    est.add_argument("--params", help="Estimator parameter YAML (default: built-in table)")
    est.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override an estimator parameter")
    est.add_argument("--no-heuristic", action="store_true", help="Disable the f_n rate heuristic")
    est.add_argument("--align", choices=ALIGN_METHODS, default="zoh", help="Stream alignment (default: zoh)")
    est.add_argument("--label", help="Material or condition label for reports")
    est.add_argument("--out-dir", default="output", help="Output directory (default: output)")
    est.set_defaults(handler=cmd_estimate)

    rep = subparsers.add_parser("report", help="Aggregate estimate runs")
    rep.add_argument("run_glob", help="Glob matching estimate output directories")
    rep.add_argument("--out", default="report.csv", help="Report CSV path; a .txt table is written beside it")
    rep.add_argument("--window", choices=[w.value for w in WindowInterval], default=WindowInterval.TRIAL.value,
                     help="Averaging window (default: trial)")
    rep.set_defaults(handler=cmd_report)

    ls = subparsers.add_parser("limit-surface", help="Export a normalized limit-surface sweep")
    ls.add_argument("--dist", required=True, help="uniform:<R>, rim:<r> or grid:<csv>")
    ls.add_argument("--n-dirs", type=int, default=33, help="Sweep directions (default: 33)")
    ls.add_argument("--resolution", type=int, help="Grid resolution for continuous patches")
    ls.add_argument("--out", default="limit_surface.csv", help="Output CSV path")
    ls.set_defaults(handler=cmd_limit_surface)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        int: 0 on success, 1 on data/runtime errors, 2 on usage or config errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logger(
        "scripts",
        log_level="DEBUG" if args.debug or config.is_debug() else "INFO",
        log_file=args.log_file,
    )

    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE

    try:
        return args.handler(args)
    except ConfigurationError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_USAGE
    except FileNotFoundError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except FrictionToolError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
