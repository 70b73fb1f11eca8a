"""
Planar stick-slip friction simulator.

Generates ground-truth validation traces for a grasped object that follows a
scripted sequence of segments. Slip segments command a constant twist and
emit the friction wrench of the selected model; stick segments ramp the
tangential load until break-away. Streams are resampled to the wrench and
slip-velocity sensor rates with optional Gaussian noise and normal-force
transients.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import config
from .config import dataclass_from_mapping
from .contact_model import (
    ContactParams,
    FrictionWrench,
    Grid,
    PlanarTwist,
    PressureDistribution,
    Rim,
    UniformDisc,
    effective_radius,
    ellipsoid_wrench,
    limit_surface_numeric,
    parse_distribution,
)
from .exceptions import ConfigurationError, ContactModelError, DomainError
from .utils.logging_utils import log_execution_time

logger = logging.getLogger(__name__)

FORCE_COLUMNS = ["t", "fx", "fy", "fn", "tau"]
VELOCITY_COLUMNS = ["t", "vx", "vy", "omega"]
TRUTH_COLUMNS = ["t", "mu_s", "mu_c", "r"]
EVENT_COLUMNS = ["t", "kind"]

SEGMENT_KEYS = (
    "duration", "twist", "mu_s", "mu_c", "r", "dist", "fn",
    "load_rate", "load_angle", "initial_tangential",
)
# Sample counts are floored with this slack so 10 s at 120 Hz gives 1200 samples.
RATE_SLACK = 1e-9


class FrictionModel(str, Enum):
    NUMERIC = "numeric"
    ELLIPSOID = "ellipsoid"


class EventKind(str, Enum):
    SLIP_ONSET = "SlipOnset"
    STICK_ONSET = "StickOnset"


@dataclass(frozen=True)
class SimEvent:
    t: float
    kind: EventKind
    f_t: Optional[float] = field(default=None, compare=False)  # tangential force at the event, N


@dataclass(frozen=True)
class ScenarioSegment:
    """
    One scripted interval of the scenario.

    A zero twist makes the segment a stick phase. fn_knots are (t, fn) pairs
    relative to the segment start, linearly interpolated and held constant
    beyond the ends.
    """

    duration: float
    twist: PlanarTwist
    truth: ContactParams
    dist: Optional[PressureDistribution] = None
    fn_knots: Tuple[Tuple[float, float], ...] = ((0.0, 2.0),)
    load_rate: float = 1.0  # N/s
    load_angle: Optional[float] = None  # rad, stick load direction; None follows the last slip direction
    initial_tangential: Optional[float] = None  # N

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigurationError(f"Segment duration must be positive, got {self.duration}", key="duration")
        knots = tuple((float(t), float(fn)) for t, fn in self.fn_knots)
        object.__setattr__(self, "fn_knots", knots)
        if not knots:
            raise ConfigurationError("Segment needs at least one normal-force knot", key="fn")
        times = [t for t, _ in knots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError("Normal-force knot times must be strictly increasing", key="fn")
        if any(not (math.isfinite(fn) and fn >= 0) for _, fn in knots):
            raise ConfigurationError("Normal force must be non-negative", key="fn")
        if not (math.isfinite(self.load_rate) and self.load_rate >= 0):
            raise ConfigurationError(f"load_rate must be non-negative, got {self.load_rate}", key="load_rate")
        if self.load_angle is not None and not math.isfinite(self.load_angle):
            raise ConfigurationError(f"load_angle must be finite, got {self.load_angle}", key="load_angle")
        if self.initial_tangential is not None and self.initial_tangential < 0:
            raise ConfigurationError("initial_tangential must be non-negative", key="initial_tangential")

    @property
    def is_stick(self) -> bool:
        return self.twist.is_zero()

    def fn_at(self, t_rel: np.ndarray) -> np.ndarray:
        times = np.array([t for t, _ in self.fn_knots])
        values = np.array([fn for _, fn in self.fn_knots])
        return np.interp(t_rel, times, values)


@dataclass
class SimConfig:
    """Simulation rates, noise and transient injection settings."""

    dt_sim: float = config.DEFAULT_DT_SIM
    force_rate: float = config.DEFAULT_FORCE_RATE
    velocity_rate: float = config.DEFAULT_VELOCITY_RATE
    noise_force_std: float = 0.0  # N
    noise_torque_std: float = 0.0  # N*m
    noise_vel_std: float = 0.0  # m/s, rad/s on omega
    seed: int = 0
    friction_model: FrictionModel = FrictionModel.NUMERIC
    eps_v: float = config.DEFAULT_EPS_V  # slip pulse is 2*eps_v
    resolution: int = config.DEFAULT_GRID_RESOLUTION
    fn_spike_amplitude: float = 0.0  # N
    fn_spike_decay: float = 0.02  # s
    fn_spike_frequency: float = 0.0  # Hz
    fn_spike_rate: float = 0.0  # Hz, extra Poisson-timed spikes
    fn_spike_tangential_gain: float = 0.0

    def __post_init__(self):
        try:
            self.friction_model = FrictionModel(self.friction_model)
        except ValueError as e:
            raise ConfigurationError(
                f"friction_model must be one of {[m.value for m in FrictionModel]}, got {self.friction_model!r}",
                key="friction_model",
            ) from e
        for key in ("dt_sim", "force_rate", "velocity_rate", "eps_v", "fn_spike_decay"):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f"{key} must be positive, got {getattr(self, key)}", key=key)
        for key in ("noise_force_std", "noise_torque_std", "noise_vel_std", "fn_spike_amplitude",
                    "fn_spike_frequency", "fn_spike_rate", "fn_spike_tangential_gain"):
            if getattr(self, key) < 0:
                raise ConfigurationError(f"{key} must be non-negative, got {getattr(self, key)}", key=key)
        if self.force_rate < self.velocity_rate:
            raise ConfigurationError("force_rate must not be below velocity_rate", key="force_rate")
        if self.dt_sim > 1.0 / self.force_rate + 1e-15:
            raise ConfigurationError("dt_sim must not exceed 1/force_rate", key="dt_sim")

    def to_dict(self) -> Dict[str, Any]:
        return {
            key: (value.value if isinstance(value, Enum) else value)
            for key, value in self.__dict__.items()
        }


@dataclass
class SimTrace:
    """Sensor streams, stick/slip events and ground truth of one run."""

    force: pd.DataFrame  # t, fx, fy, fn, tau at force_rate
    velocity: pd.DataFrame  # t, vx, vy, omega at velocity_rate
    events: List[SimEvent]
    truth: pd.DataFrame  # t, mu_s, mu_c, r at velocity_rate

    def events_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[e.t, e.kind.value] for e in self.events], columns=EVENT_COLUMNS)

    def to_raw_streams(self):
        from .ingest import RawStreams
        return RawStreams(force=self.force.copy(), velocity=self.velocity.copy())

    def equals(self, other: "SimTrace") -> bool:
        return (
            self.force.equals(other.force)
            and self.velocity.equals(other.velocity)
            and self.truth.equals(other.truth)
            and self.events == other.events
        )


def _segment_distribution(segment: ScenarioSegment) -> PressureDistribution:
    return segment.dist if segment.dist is not None else Rim(segment.truth.r)


def _segment_r_eff(segment: ScenarioSegment, sim_config: SimConfig) -> float:
    if sim_config.friction_model is FrictionModel.ELLIPSOID:
        return segment.truth.r
    return effective_radius(_segment_distribution(segment))


def _unit_wrench(segment: ScenarioSegment, sim_config: SimConfig) -> FrictionWrench:
    """Slip wrench at f_n = 1 N; the wrench scales linearly with f_n."""
    if sim_config.friction_model is FrictionModel.ELLIPSOID:
        return ellipsoid_wrench(segment.twist, 1.0, segment.truth, eps_v=0.0)
    return limit_surface_numeric(
        _segment_distribution(segment), segment.twist, segment.truth.mu_c, 1.0, sim_config.resolution
    )


def _sample_indices(duration: float, rate: float, dt_sim: float, n_sim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sensor timestamps and their nearest-past simulation indices."""
    n = int(math.floor(duration * rate + RATE_SLACK))
    times = np.arange(n) / rate
    index = np.floor(times / dt_sim + RATE_SLACK).astype(int)
    return times, np.minimum(index, n_sim - 1)


def _spike_signal(t: np.ndarray, onsets: Sequence[float], sim_config: SimConfig) -> np.ndarray:
    signal = np.zeros_like(t)
    if sim_config.fn_spike_amplitude == 0:
        return signal
    for onset in onsets:
        lag = t - onset
        active = lag >= 0
        signal[active] += (
            sim_config.fn_spike_amplitude
            * np.exp(-lag[active] / sim_config.fn_spike_decay)
            * np.cos(2.0 * np.pi * sim_config.fn_spike_frequency * lag[active])
        )
    return signal


@log_execution_time(logger)
def run_scenario(segments: Sequence[ScenarioSegment], sim_config: SimConfig) -> SimTrace:
    """
    Simulate the scenario and return sensor streams, events and truth.

    Raises:
        ConfigurationError: If the segment list is empty or a segment cannot be simulated
    """
    if not segments:
        raise ConfigurationError("Scenario needs at least one segment", key="segments")

    dt = sim_config.dt_sim
    counts = [max(1, int(round(seg.duration / dt))) for seg in segments]
    n_sim = sum(counts)
    t_sim = np.arange(n_sim) * dt

    fx = np.zeros(n_sim)
    fy = np.zeros(n_sim)
    tau = np.zeros(n_sim)
    fn = np.zeros(n_sim)
    commanded = np.zeros((n_sim, 3))
    truth = np.zeros((n_sim, 3))  # mu_s, mu_c, r_eff
    segment_of = np.zeros(n_sim, dtype=int)

    events: List[SimEvent] = []
    breakaways: List[int] = []  # sim indices of break-away
    load_angles = [0.0] * len(segments)
    slipping = False
    slip_direction = 0.0
    carried_tangential = 0.0
    start = 0

    for seg_index, (segment, count) in enumerate(zip(segments, counts)):
        stop = start + count
        window = slice(start, stop)
        fn[window] = segment.fn_at(t_sim[window] - t_sim[start])
        segment_of[window] = seg_index
        try:
            truth[window] = (segment.truth.mu_s, segment.truth.mu_c, _segment_r_eff(segment, sim_config))
        except ContactModelError as e:
            raise ConfigurationError(f"Segment {seg_index}: {e}", key=f"segments[{seg_index}]") from e

        if not segment.is_stick:
            if not slipping:
                events.append(SimEvent(float(t_sim[start]), EventKind.SLIP_ONSET))
                slipping = True
            try:
                unit = _unit_wrench(segment, sim_config)
            except ContactModelError as e:
                raise ConfigurationError(f"Segment {seg_index}: {e}", key=f"segments[{seg_index}]") from e
            fx[window] = unit.f_x * fn[window]
            fy[window] = unit.f_y * fn[window]
            tau[window] = unit.tau * fn[window]
            commanded[window] = (segment.twist.v_x, segment.twist.v_y, segment.twist.omega)
            if math.hypot(segment.twist.v_x, segment.twist.v_y) > 0:
                slip_direction = math.atan2(segment.twist.v_y, segment.twist.v_x)
            carried_tangential = float(math.hypot(fx[stop - 1], fy[stop - 1]))
        else:
            if slipping:
                events.append(SimEvent(float(t_sim[start]), EventKind.STICK_ONSET))
                slipping = False
            magnitude, slipping = _stick_ramp(
                segment, start, stop, t_sim, fn,
                segment.initial_tangential if segment.initial_tangential is not None else carried_tangential,
                events, breakaways,
            )
            angle = segment.load_angle if segment.load_angle is not None else slip_direction
            load_angles[seg_index] = angle
            # friction opposes the load
            fx[window] = -magnitude * math.cos(angle)
            fy[window] = -magnitude * math.sin(angle)
            if slipping:
                # broke away on the last sample; whatever follows starts from the kinetic level
                carried_tangential = float(segment.truth.mu_c * fn[stop - 1])
            else:
                carried_tangential = float(magnitude[-1])
            slip_direction = angle

        start = stop

    total = n_sim * dt
    force_t, force_idx = _sample_indices(total, sim_config.force_rate, dt, n_sim)
    vel_t, vel_idx = _sample_indices(total, sim_config.velocity_rate, dt, n_sim)

    velocity = commanded[vel_idx].copy()
    spike_onsets = []
    for k in breakaways:
        after = np.nonzero(vel_idx > k)[0]
        if after.size == 0 or segment_of[vel_idx[after[0]]] != segment_of[k]:
            spike_onsets.append(float(t_sim[min(k + 1, n_sim - 1)]))
            continue
        j = after[0]
        angle = load_angles[segment_of[k]]
        pulse = 2.0 * sim_config.eps_v
        velocity[j] = (pulse * math.cos(angle), pulse * math.sin(angle), 0.0)
        # the transient starts once the object has re-stuck after the pulse tick
        spike_onsets.append(float(t_sim[min(vel_idx[j] + 1, n_sim - 1)]))

    rng = np.random.default_rng(sim_config.seed)
    if sim_config.fn_spike_rate > 0 and sim_config.fn_spike_amplitude > 0:
        n_extra = rng.poisson(sim_config.fn_spike_rate * total)
        spike_onsets.extend(np.sort(rng.uniform(0.0, total, size=n_extra)).tolist())

    sampled_fn = fn[force_idx]
    spike = _spike_signal(force_t, spike_onsets, sim_config)
    measured_fn = sampled_fn + spike
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(
            sampled_fn > 0, (sampled_fn + sim_config.fn_spike_tangential_gain * spike) / sampled_fn, 1.0
        )

    n_force = force_t.size
    force = pd.DataFrame({
        "t": force_t,
        "fx": fx[force_idx] * scale + rng.normal(0.0, sim_config.noise_force_std, n_force),
        "fy": fy[force_idx] * scale + rng.normal(0.0, sim_config.noise_force_std, n_force),
        "fn": measured_fn + rng.normal(0.0, sim_config.noise_force_std, n_force),
        "tau": tau[force_idx] * scale + rng.normal(0.0, sim_config.noise_torque_std, n_force),
    }, columns=FORCE_COLUMNS)

    moving = np.any(velocity != 0.0, axis=1)
    noise = rng.normal(0.0, sim_config.noise_vel_std, velocity.shape)
    velocity[moving] += noise[moving]
    velocity_frame = pd.DataFrame(
        {"t": vel_t, "vx": velocity[:, 0], "vy": velocity[:, 1], "omega": velocity[:, 2]},
        columns=VELOCITY_COLUMNS,
    )
    truth_frame = pd.DataFrame(
        {"t": vel_t, "mu_s": truth[vel_idx, 0], "mu_c": truth[vel_idx, 1], "r": truth[vel_idx, 2]},
        columns=TRUTH_COLUMNS,
    )

    logger.info(
        "Simulated %.3f s over %d segment(s): %d force / %d velocity samples, %d event(s)",
        total, len(segments), n_force, vel_t.size, len(events),
    )
    return SimTrace(force=force, velocity=velocity_frame, events=events, truth=truth_frame)


def _stick_ramp(
    segment: ScenarioSegment,
    start: int,
    stop: int,
    t_sim: np.ndarray,
    fn: np.ndarray,
    f_start: float,
    events: List[SimEvent],
    breakaways: List[int],
) -> Tuple[np.ndarray, bool]:
    """
    Tangential load magnitude over a stick segment.

    The load ramps at load_rate; the first sample with f_t > mu_s f_n keeps
    the break-away value, after which the load drops to mu_c f_n and ramps
    again from there.

    Returns:
        Tuple of (magnitude per sample, whether the segment ends in slip
        because it broke away on its last sample)
    """
    magnitude = np.zeros(stop - start)
    k0 = start
    f0 = f_start
    mu_s, mu_c = segment.truth.mu_s, segment.truth.mu_c
    while k0 < stop:
        ramp = f0 + segment.load_rate * (t_sim[k0:stop] - t_sim[k0])
        crossed = ramp > mu_s * fn[k0:stop]
        if not crossed.any():
            magnitude[k0 - start:] = ramp
            break
        k_break = k0 + int(np.argmax(crossed))
        magnitude[k0 - start:k_break - start + 1] = ramp[:k_break - k0 + 1]
        events.append(SimEvent(float(t_sim[k_break]), EventKind.SLIP_ONSET, f_t=float(ramp[k_break - k0])))
        breakaways.append(k_break)
        k0 = k_break + 1
        if k0 >= stop:
            return magnitude, True
        f0 = mu_c * fn[k0]
        events.append(SimEvent(float(t_sim[k0]), EventKind.STICK_ONSET, f_t=float(f0)))
    return magnitude, False


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

def make_paper_like_scenario() -> List[ScenarioSegment]:
    """
    Linear slip, stick, rotation, stick and planar slip with step changes in
    mu_s, mu_c and r between the motion segments. Each patch is a uniform
    disc of radius 1.5 r so its effective radius equals r.
    """
    linear = ContactParams(mu_s=0.6, mu_c=0.4, r=0.010)
    rotation = ContactParams(mu_s=0.7, mu_c=0.5, r=0.015)
    planar = ContactParams(mu_s=0.65, mu_c=0.45, r=0.012)
    still = PlanarTwist(0.0, 0.0, 0.0)
    return [
        ScenarioSegment(2.0, PlanarTwist(0.01, 0.0, 0.0), linear, UniformDisc(1.5 * linear.r)),
        ScenarioSegment(2.0, still, linear, UniformDisc(1.5 * linear.r), load_rate=1.0),
        ScenarioSegment(2.0, PlanarTwist(0.0, 0.0, 1.0), rotation, UniformDisc(1.5 * rotation.r)),
        ScenarioSegment(1.5, still, rotation, UniformDisc(1.5 * rotation.r), load_rate=1.0),
        ScenarioSegment(3.0, PlanarTwist(0.01, 0.005, 0.8), planar, UniformDisc(1.5 * planar.r)),
    ]


def make_heuristic_batch_scenario(duration: float = 10.0) -> List[ScenarioSegment]:
    """A single linear slip used for heuristic on/off comparisons."""
    truth = ContactParams(mu_s=0.6, mu_c=0.4, r=0.010)
    return [ScenarioSegment(duration, PlanarTwist(0.01, 0.0, 0.0), truth, UniformDisc(0.015))]


def make_heuristic_batch_config(seed: int = 0) -> SimConfig:
    """Small sensor noise plus 4 N normal-force spikes arriving at 2 Hz."""
    return SimConfig(
        noise_force_std=0.01,
        noise_torque_std=1e-4,
        noise_vel_std=1e-4,
        seed=seed,
        fn_spike_amplitude=4.0,
        fn_spike_decay=0.01,
        fn_spike_frequency=0.0,
        fn_spike_rate=2.0,
        fn_spike_tangential_gain=0.0,
    )


# ---------------------------------------------------------------------------
# Scenario file parsing
# ---------------------------------------------------------------------------

def _parse_fn(value: Any, key: str) -> Tuple[Tuple[float, float], ...]:
    try:
        if isinstance(value, (int, float)):
            return ((0.0, float(value)),)
        return tuple((float(t), float(fn)) for t, fn in value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"'{key}' must be a number or a list of [t, fn] pairs", key=key) from e


def _parse_dist(value: Any, key: str) -> PressureDistribution:
    if isinstance(value, str):
        try:
            return parse_distribution(value)
        except ConfigurationError as e:
            raise ConfigurationError(str(e), key=key) from e
    if isinstance(value, dict) and set(value) == {"grid"}:
        try:
            cells = np.asarray(value["grid"], dtype=float)
            if cells.ndim != 2 or cells.shape[1] != 3:
                raise DomainError("Grid cells must be (x, y, weight) triples")
            return Grid.from_points(cells[:, :2], cells[:, 2])
        except (TypeError, ValueError, ContactModelError) as e:
            raise ConfigurationError(f"Invalid grid in '{key}': {e}", key=key) from e
    raise ConfigurationError(f"'{key}' must be 'uniform:R', 'rim:r', 'grid:<csv>' or a grid mapping", key=key)


def segment_from_mapping(raw: Dict[str, Any], index: int) -> ScenarioSegment:
    """Build a segment from one entry of a scenario file's ``segments`` list."""
    prefix = f"segments[{index}]"
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{prefix} must be a mapping", key=prefix)
    for key in raw:
        if key not in SEGMENT_KEYS:
            raise ConfigurationError(f"Unknown key '{key}' in {prefix}", key=f"{prefix}.{key}")
    for key in ("duration", "mu_s", "mu_c", "r"):
        if key not in raw:
            raise ConfigurationError(f"{prefix} is missing '{key}'", key=f"{prefix}.{key}")

    def number(key: str, default: Optional[float] = None) -> Optional[float]:
        value = raw.get(key, default)
        if value is None:
            return None
        try:
            return float(value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid value for '{prefix}.{key}': {value!r}", key=f"{prefix}.{key}") from e

    twist_raw = raw.get("twist", [0.0, 0.0, 0.0])
    try:
        v_x, v_y, omega = (float(v) for v in twist_raw)
        twist = PlanarTwist(v_x, v_y, omega)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"'{prefix}.twist' must be [vx, vy, omega]", key=f"{prefix}.twist") from e

    try:
        truth = ContactParams(mu_s=number("mu_s"), mu_c=number("mu_c"), r=number("r"))
    except ContactModelError as e:
        raise ConfigurationError(f"{prefix}: {e}", key=f"{prefix}.mu_s") from e

    dist = _parse_dist(raw["dist"], f"{prefix}.dist") if "dist" in raw else None
    fields = dict(
        duration=number("duration"),
        fn_knots=_parse_fn(raw.get("fn", 2.0), f"{prefix}.fn"),
        load_rate=number("load_rate", 1.0),
        load_angle=number("load_angle"),
        initial_tangential=number("initial_tangential"),
    )
    try:
        return ScenarioSegment(twist=twist, truth=truth, dist=dist, **fields)
    except ConfigurationError as e:
        raise ConfigurationError(f"{prefix}: {e}", key=f"{prefix}.{e.key}") from e


def sim_config_from_mapping(mapping: Dict[str, Any], source: str = "scenario config") -> SimConfig:
    return dataclass_from_mapping(SimConfig, mapping, source)
