"""
Per-trial and between-trial statistics of estimate series.

For each quantity a batch reports the mean of trial means, the standard
deviation of trial means between experiments, and the mean within-trial
standard deviation. Standard deviations are population (ddof=0).
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT
from .estimator import EstimateRecord
from .exceptions import InsufficientDataError, WindowingError
from .utils.general import atomic_output, atomic_write_text

logger = logging.getLogger(__name__)

QUANTITIES = ("mu_c", "mu_s", "r")
REPORT_FLOAT_FORMAT = "%.4f"


class WindowInterval(str, Enum):
    TRIAL = "trial"  # every tick after the quantity's first update
    SLIP = "slip"  # only ticks with an active mu_c or r update


@dataclass(frozen=True)
class WindowRule:
    """Selects the records a trial's statistics are computed over."""

    interval: WindowInterval = WindowInterval.TRIAL
    skip_halted: bool = True
    require_contact: bool = True


@dataclass(frozen=True)
class TrialSummary:
    trial_id: str
    mean_mu_c: float
    std_mu_c: float
    mean_mu_s: float
    std_mu_s: float
    mean_r: float
    std_r: float
    n_samples: int

    def mean(self, quantity: str) -> float:
        return getattr(self, f"mean_{quantity}")

    def std(self, quantity: str) -> float:
        return getattr(self, f"std_{quantity}")


@dataclass(frozen=True)
class QuantityStats:
    """Mean, between-trial std of the mean and mean within-trial std."""

    mean: float
    std_of_mean: float
    mean_std: float


_ESTIMATE_FIELD = {"mu_c": "mu_c_hat", "mu_s": "mu_s_hat", "r": "r_hat"}
_UPDATE_FLAG = {"mu_c": "updated_mu_c", "mu_s": "updated_mu_s", "r": "updated_r"}


def _base_mask(records: Sequence[EstimateRecord], window: WindowRule) -> np.ndarray:
    mask = np.ones(len(records), dtype=bool)
    if window.require_contact:
        mask &= np.array([rec.in_contact for rec in records], dtype=bool)
    if window.skip_halted:
        mask &= ~np.array([rec.halted for rec in records], dtype=bool)
    if window.interval is WindowInterval.SLIP:
        mask &= np.array([rec.updated_mu_c or rec.updated_r for rec in records], dtype=bool)
    return mask


def summarize_trial(
    records: Sequence[EstimateRecord],
    window: WindowRule = WindowRule(),
    trial_id: str = "trial",
) -> TrialSummary:
    """
    Mean and population std of each estimate over the selected records.

    A quantity only counts from its first update onwards; a quantity that is
    never updated yields NaN.

    Raises:
        WindowingError: If no record passes the window rule
    """
    base = _base_mask(records, window)
    if not base.any():
        raise WindowingError(f"No record of {trial_id} passes the window rule {window}")

    values: Dict[str, Tuple[float, float]] = {}
    for quantity in QUANTITIES:
        updated = np.array([getattr(rec, _UPDATE_FLAG[quantity]) for rec in records], dtype=bool)
        started = np.cumsum(updated) > 0
        selected = base & started
        if not selected.any():
            logger.warning("%s: %s never updated inside the window", trial_id, quantity)
            values[quantity] = (math.nan, math.nan)
            continue
        series = np.array([getattr(rec, _ESTIMATE_FIELD[quantity]) for rec in records])[selected]
        values[quantity] = (float(np.mean(series)), float(np.std(series)))

    return TrialSummary(
        trial_id=trial_id,
        mean_mu_c=values["mu_c"][0],
        std_mu_c=values["mu_c"][1],
        mean_mu_s=values["mu_s"][0],
        std_mu_s=values["mu_s"][1],
        mean_r=values["r"][0],
        std_r=values["r"][1],
        n_samples=int(base.sum()),
    )


def _reduce(values: Sequence[float], reducer) -> float:
    # sorted so the result does not depend on trial order
    finite = np.sort(np.array([v for v in values if math.isfinite(v)], dtype=float))
    return float(reducer(finite)) if finite.size else math.nan


def aggregate(trials: Sequence[TrialSummary], strict: bool = False) -> Dict[str, QuantityStats]:
    """
    Between-trial statistics per quantity.

    With fewer than two trials the between-trial spread is NaN, or
    InsufficientDataError is raised when strict is set; the error carries the
    partial result.
    """
    if not trials:
        raise InsufficientDataError("No trials to aggregate", partial={})
    result = {}
    for quantity in QUANTITIES:
        means = [trial.mean(quantity) for trial in trials]
        stds = [trial.std(quantity) for trial in trials]
        result[quantity] = QuantityStats(
            mean=_reduce(means, np.mean),
            std_of_mean=_reduce(means, np.std) if len(trials) >= 2 else math.nan,
            mean_std=_reduce(stds, np.mean),
        )
    if len(trials) < 2 and strict:
        raise InsufficientDataError(
            f"Between-trial spread needs at least 2 trials, got {len(trials)}", partial=result
        )
    return result


def condition_label(label: str, heuristic: bool) -> str:
    return f"{label} {'with' if heuristic else 'no'} heuristics"


def render_report_table(rows: Sequence[Tuple[str, Dict[str, QuantityStats]]]) -> pd.DataFrame:
    """
    One row per condition with (mean, std of mean, mean std) for mu_c, mu_s and r.

    Args:
        rows: Pairs of (condition label, aggregate result)
    """
    columns = ["condition"] + [
        f"{quantity}_{stat}" for quantity in QUANTITIES for stat in ("mean", "std_of_mean", "mean_std")
    ]
    data = []
    for label, stats in rows:
        row = [label]
        for quantity in QUANTITIES:
            s = stats[quantity]
            row += [s.mean, s.std_of_mean, s.mean_std]
        data.append(row)
    return pd.DataFrame(data, columns=columns)


def write_report(table: pd.DataFrame, out_path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write the report as CSV and as an aligned text table next to it."""
    csv_path = Path(out_path)
    text_path = csv_path.with_suffix(".txt")
    with atomic_output(csv_path) as tmp:
        table.to_csv(tmp, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    text = table.to_string(index=False, float_format=lambda v: REPORT_FLOAT_FORMAT % v, na_rep="-")
    atomic_write_text(text_path, text + "\n")
    logger.info("Wrote report with %d row(s) to %s", len(table), csv_path)
    return csv_path, text_path
