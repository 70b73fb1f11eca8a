"""
Trace file I/O and stream alignment.

Traces are CSV files in the contact frame: ``<prefix>_force.csv``
(t,fx,fy,fn,tau), ``<prefix>_vel.csv`` (t,vx,vy,omega), plus the simulator's
``<prefix>_truth.csv`` (t,mu_s,mu_c,r) and ``<prefix>_events.csv`` (t,kind).
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT, DEFAULT_DELTA_T
from .estimator import Measurement
from .exceptions import AlignmentError, ConfigurationError, TraceOrderingError, TraceSchemaError, TraceValueError
from .simulator import EVENT_COLUMNS, FORCE_COLUMNS, TRUTH_COLUMNS, VELOCITY_COLUMNS, EventKind, SimEvent, SimTrace
from .utils.general import atomic_output

logger = logging.getLogger(__name__)

TRACE_SUFFIXES = {
    "force": "_force.csv",
    "velocity": "_vel.csv",
    "truth": "_truth.csv",
    "events": "_events.csv",
}
ALIGN_METHODS = ("zoh", "linear")
# Relative mismatch between velocity spacing and the tick interval that gets a warning.
SPACING_TOLERANCE = 0.01

PathLike = Union[str, Path]


@dataclass
class RawStreams:
    """Validated force and velocity streams."""

    force: pd.DataFrame  # t, fx, fy, fn, tau
    velocity: pd.DataFrame  # t, vx, vy, omega


def trace_paths(prefix: PathLike) -> Dict[str, Path]:
    """File paths of a trace set sharing ``prefix``."""
    prefix = str(prefix)
    return {name: Path(prefix + suffix) for name, suffix in TRACE_SUFFIXES.items()}


def _read_stream(path: PathLike, columns: Sequence[str], ordered: bool = True) -> pd.DataFrame:
    """
    Read and validate one numeric CSV stream.

    Raises:
        FileNotFoundError: If the file doesn't exist
        TraceSchemaError: If the file is empty or a column is missing
        TraceValueError: If a value is non-numeric, NaN or infinite
        TraceOrderingError: If timestamps are not strictly increasing
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Trace file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError as e:
        raise TraceSchemaError(f"Trace file {path} is empty", str(path)) from e

    for column in columns:
        if column not in frame.columns:
            raise TraceSchemaError(f"Trace file {path} is missing column '{column}'", str(path), column)
    if frame.empty:
        raise TraceSchemaError(f"Trace file {path} has no samples", str(path))

    frame = frame[list(columns)].copy()
    for column in columns:
        values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
        bad = np.nonzero(~np.isfinite(values))[0]
        if bad.size:
            row = int(bad[0])
            raise TraceValueError(
                f"Invalid value {frame[column].iloc[row]!r} in {path} at row {row}, column '{column}'",
                str(path), row, column,
            )
        frame[column] = values

    if ordered:
        steps = np.diff(frame["t"].to_numpy())
        bad = np.nonzero(steps <= 0)[0]
        if bad.size:
            row = int(bad[0]) + 1
            raise TraceOrderingError(
                f"Timestamps in {path} stop increasing at row {row} (t={frame['t'].iloc[row]})", str(path), row
            )
    return frame.reset_index(drop=True)


def parse_trace(force_file: PathLike, velocity_file: PathLike) -> RawStreams:
    """Read and validate a force/velocity file pair."""
    force = _read_stream(force_file, FORCE_COLUMNS)
    velocity = _read_stream(velocity_file, VELOCITY_COLUMNS)
    logger.info("Read %d force and %d velocity samples", len(force), len(velocity))
    return RawStreams(force=force, velocity=velocity)


def load_trace(prefix: PathLike) -> RawStreams:
    """parse_trace on ``<prefix>_force.csv`` and ``<prefix>_vel.csv``."""
    paths = trace_paths(prefix)
    return parse_trace(paths["force"], paths["velocity"])


def read_truth(path: PathLike) -> pd.DataFrame:
    return _read_stream(path, TRUTH_COLUMNS)


def read_events(path: PathLike) -> List[SimEvent]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Events file not found: {path}")
    frame = pd.read_csv(path, dtype={"kind": str})
    missing = [column for column in EVENT_COLUMNS if column not in frame.columns]
    if missing:
        raise TraceSchemaError(f"Events file {path} is missing column '{missing[0]}'", str(path), missing[0])
    events = []
    for row, (t, kind) in enumerate(zip(frame["t"], frame["kind"])):
        try:
            events.append(SimEvent(float(t), EventKind(kind)))
        except ValueError as e:
            raise TraceValueError(f"Invalid event in {path} at row {row}: {e}", str(path), row, "kind") from e
    return events


def _write_frame(frame: pd.DataFrame, path: Path) -> None:
    with atomic_output(path) as tmp:
        frame.to_csv(tmp, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def write_trace(trace: SimTrace, prefix: PathLike) -> Dict[str, Path]:
    """Write the four CSV files of a simulated trace."""
    paths = trace_paths(prefix)
    _write_frame(trace.force[FORCE_COLUMNS], paths["force"])
    _write_frame(trace.velocity[VELOCITY_COLUMNS], paths["velocity"])
    _write_frame(trace.truth[TRUTH_COLUMNS], paths["truth"])
    _write_frame(trace.events_frame(), paths["events"])
    logger.debug("Wrote trace set %s", prefix)
    return paths


def align(raw: RawStreams, delta_t: float = DEFAULT_DELTA_T, method: str = "zoh") -> List[Measurement]:
    """
    Pair each velocity sample inside the overlap of both streams with force.

    ``zoh`` takes the latest force sample at or before each velocity
    timestamp; ``linear`` interpolates the force channels instead.

    Raises:
        AlignmentError: If the streams do not overlap in time
    """
    if method not in ALIGN_METHODS:
        raise ConfigurationError(f"Unknown alignment method '{method}'", key="align")

    force_t = raw.force["t"].to_numpy(dtype=float)
    vel_t = raw.velocity["t"].to_numpy(dtype=float)
    if force_t.size == 0 or vel_t.size == 0:
        raise AlignmentError("Both streams must be non-empty")

    start = max(force_t[0], vel_t[0])
    stop = min(force_t[-1], vel_t[-1])
    keep = (vel_t >= start) & (vel_t <= stop)
    if start > stop or not keep.any():
        raise AlignmentError(
            f"Force [{force_t[0]:.6g}, {force_t[-1]:.6g}] s and velocity "
            f"[{vel_t[0]:.6g}, {vel_t[-1]:.6g}] s streams do not overlap"
        )
    dropped = int(vel_t.size - keep.sum())
    if dropped:
        logger.info("Dropped %d velocity sample(s) outside the force stream", dropped)

    if vel_t.size > 1:
        spacing = float(np.median(np.diff(vel_t)))
        if abs(spacing - delta_t) > SPACING_TOLERANCE * delta_t:
            logger.warning("Velocity spacing %.6g s differs from tick interval %.6g s", spacing, delta_t)

    t = vel_t[keep]
    velocity = raw.velocity.loc[keep, ["vx", "vy", "omega"]].to_numpy(dtype=float)
    channels = ["fx", "fy", "fn", "tau"]
    if method == "zoh":
        index = np.searchsorted(force_t, t, side="right") - 1
        force = raw.force[channels].to_numpy(dtype=float)[index]
    else:
        force = np.column_stack([np.interp(t, force_t, raw.force[c].to_numpy(dtype=float)) for c in channels])

    return [
        Measurement(float(ti), float(f[0]), float(f[1]), float(f[2]), float(f[3]), float(v[0]), float(v[1]), float(v[2]))
        for ti, f, v in zip(t, force, velocity)
    ]
