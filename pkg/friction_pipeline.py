"""
End-to-end friction estimation workflow.

Simulates a batch of trials, runs the estimator on each with and without the
normal-force rate heuristic, and writes a between-trial report.
"""

import argparse
import logging
import logging.config
import sys
from pathlib import Path
from typing import Dict, List

# Add the project root to the Python path
project_root = str(Path(__file__).parent.absolute())
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from config.logging_config import get_logging_config
from scripts.utils.logging_utils import log_execution_time

logging.config.dictConfig(get_logging_config(debug=False))
logger = logging.getLogger(__name__)


def parse_arguments() -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(description="Simulate, estimate and report friction in one run")
    parser.add_argument(
        "--scenario",
        choices=["paper-like", "heuristic-batch"],
        default="heuristic-batch",
        help="Built-in scenario to simulate (default: heuristic-batch)",
    )
    parser.add_argument("--trials", type=int, default=10, help="Number of trials (default: 10)")
    parser.add_argument("--seed", type=int, help="Base seed (default: FRICTION_SEED or 0)")
    parser.add_argument("--label", default="disc", help="Condition label in the report (default: disc)")
    parser.add_argument("--params", help="Estimator parameter YAML (default: built-in table)")
    parser.add_argument("--out-dir", default="output/pipeline", help="Output directory")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    return parser.parse_args()


@log_execution_time(logger)
def simulate_trials(scenario: str, trials: int, seed: int, out_dir: Path) -> List[Path]:
    """Simulate ``trials`` runs and return their trace prefixes."""
    from scripts.cli import trial_seeds
    from scripts.ingest import write_trace
    from scripts.simulator import (
        SimConfig,
        make_heuristic_batch_config,
        make_heuristic_batch_scenario,
        make_paper_like_scenario,
        run_scenario,
    )

    if scenario == "paper-like":
        segments, make_config = make_paper_like_scenario(), lambda s: SimConfig(seed=s)
    else:
        segments, make_config = make_heuristic_batch_scenario(), make_heuristic_batch_config

    prefixes = []
    for index, trial_seed in enumerate(trial_seeds(seed, trials)):
        prefix = out_dir / "traces" / f"trial_{index:03d}"
        write_trace(run_scenario(segments, make_config(trial_seed)), prefix)
        logger.debug("Trial %d (seed %d) written to %s", index, trial_seed, prefix)
        prefixes.append(prefix)
    logger.info("Simulated %d %s trial(s)", len(prefixes), scenario)
    return prefixes


@log_execution_time(logger)
def estimate_trials(prefixes: List[Path], params_path, heuristic: bool) -> List:
    """Estimate every trial and return per-trial summaries."""
    from scripts.config import load_estimator_params
    from scripts.estimator import FrictionEstimator
    from scripts.ingest import align, load_trace
    from scripts.stats import summarize_trial

    params = load_estimator_params(params_path, {"heuristic_enabled": heuristic})
    summaries = []
    for prefix in prefixes:
        records = FrictionEstimator(params).run(align(load_trace(prefix), params.delta_t))
        summaries.append(summarize_trial(records, trial_id=prefix.name))
    return summaries


def main() -> int:
    """Run the complete simulate / estimate / report workflow.

    Returns:
        int: Exit code (0 for success, non-zero for errors)
    """
    args = parse_arguments()

    if args.debug:
        logging.config.dictConfig(get_logging_config(debug=True))
        logger.debug("Debug logging enabled")

    from scripts.config import get_default_seed
    from scripts.exceptions import ConfigurationError, FrictionToolError
    from scripts.stats import aggregate, condition_label, render_report_table, write_report

    out_dir = Path(args.out_dir)
    try:
        seed = args.seed if args.seed is not None else get_default_seed()
        prefixes = simulate_trials(args.scenario, args.trials, seed, out_dir)

        rows = []
        for heuristic in (False, True):
            summaries = estimate_trials(prefixes, args.params, heuristic)
            rows.append((condition_label(args.label, heuristic), aggregate(summaries)))

        csv_path, text_path = write_report(render_report_table(rows), out_dir / "report.csv")
        logger.info("Report written to %s", text_path)
        print(text_path.read_text())
    except (ConfigurationError, FileNotFoundError) as e:
        logger.error("%s", e)
        return 2
    except FrictionToolError as e:
        logger.critical("Pipeline failed: %s", e, exc_info=True)
        return 1

    logger.info("Friction pipeline completed successfully")
    return 0


if __name__ == "__main__":
    sys.exit(main())
