"""
Online estimator for Coulomb friction, effective contact radius and static
friction.

mu_c and r are tracked with gated scalar RLS on the ellipsoid model; mu_s
follows the buffered break-away rule run on every tick. A normal-force rate
heuristic can halt all updates for a short interval after fast f_n rises.
"""
import dataclasses
import logging
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Deque, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from . import config
from .contact_model import FrictionWrench, PlanarTwist, motion_ratios, scaled_speed
from .exceptions import ConfigurationError, DomainError, MeasurementError, StreamError, TraceSchemaError
from .utils.general import atomic_output
from .utils.logging_utils import log_execution_time

logger = logging.getLogger(__name__)

_FILE_KEYS = {name: key for key, name in config.ESTIMATOR_KEY_ALIASES.items()}

# Halt windows are compared with this slack so 9-digit timestamps round the right way.
HALT_TOLERANCE = 1e-6  # s
# Slip speeds below this count as exactly zero in the mu_s rule.
ZERO_SPEED = 1e-12  # m/s
FORCE_GAMMA_EPS = 1e-10

ESTIMATE_COLUMNS = [
    "t", "mu_c", "mu_s", "r", "gamma_t", "gamma_tau",
    "updated_mu_c", "updated_r", "halted", "in_contact", "updated_mu_s",
]
ERROR_COLUMNS = ["err_mu_c", "err_mu_s", "err_r"]
FLAG_COLUMNS = ["updated_mu_c", "updated_r", "halted", "in_contact", "updated_mu_s"]


@dataclass
class EstimatorParams:
    """Estimator tuning; defaults are the reference parameter set."""

    mu_c_0: float = config.DEFAULT_MU_C_0
    r_0: float = config.DEFAULT_R_0
    mu_s_0: float = config.DEFAULT_MU_S_0
    eps_tau: float = config.DEFAULT_EPS_TAU
    eps_t: float = config.DEFAULT_EPS_T
    eps_v: float = config.DEFAULT_EPS_V
    eps_fn: float = config.DEFAULT_EPS_FN
    p0: float = config.DEFAULT_P0
    lam: float = config.DEFAULT_LAMBDA
    n_b: int = config.DEFAULT_N_B
    n_a: int = config.DEFAULT_N_A
    eps_delta: float = config.DEFAULT_EPS_DELTA
    halt_interval: float = config.DEFAULT_HALT_INTERVAL
    delta_t: float = config.DEFAULT_DELTA_T
    v_s: Optional[float] = None  # slip-detect speed; None follows eps_v
    heuristic_enabled: bool = True

    def __post_init__(self):
        if self.v_s is None:
            self.v_s = self.eps_v
        else:
            try:
                self.v_s = float(self.v_s)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"Invalid value for 'v_s': {self.v_s!r}", key="v_s") from e

        if not 0.0 < self.lam <= 1.0:
            raise ConfigurationError(f"lambda must lie in (0, 1], got {self.lam}", key="lambda")
        for name in ("eps_tau", "eps_t", "eps_v", "eps_fn", "eps_delta", "v_s", "p0", "delta_t", "mu_c_0", "r_0", "mu_s_0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                key = _FILE_KEYS.get(name, name)
                raise ConfigurationError(f"{key} must be positive, got {value}", key=key)
        if self.halt_interval < 0:
            raise ConfigurationError(f"Delta_t must be non-negative, got {self.halt_interval}", key="Delta_t")
        if self.n_a < 1:
            raise ConfigurationError(f"n_a must be at least 1, got {self.n_a}", key="n_a")
        if self.n_a > self.n_b:
            raise ConfigurationError(f"n_a ({self.n_a}) must not exceed n_b ({self.n_b})", key="n_a")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class Measurement:
    """One time-aligned tick of contact wrench and slip velocity."""

    t: float
    f_x: float
    f_y: float
    f_n: float
    tau: float
    v_x: float
    v_y: float
    omega: float

    @property
    def f_t(self) -> float:
        return math.hypot(self.f_x, self.f_y)

    @property
    def v_t(self) -> float:
        return math.hypot(self.v_x, self.v_y)

    @property
    def twist(self) -> PlanarTwist:
        return PlanarTwist(self.v_x, self.v_y, self.omega)

    def is_finite(self) -> bool:
        return all(math.isfinite(getattr(self, f.name)) for f in dataclasses.fields(self))

    @classmethod
    def from_wrench(cls, t: float, twist: PlanarTwist, fn: float, wrench: FrictionWrench) -> "Measurement":
        """Pair a friction wrench with the twist and normal force that produced it."""
        return cls(t, wrench.f_x, wrench.f_y, fn, wrench.tau, twist.v_x, twist.v_y, twist.omega)


@dataclass
class EstimatorState:
    """Mutable estimator state for one measurement stream."""

    mu_c_hat: float
    p_mu: float
    r_hat: float
    p_r: float
    mu_s_hat: float
    buffer: Deque[float]
    v_z: int = 1
    halt_until: float = -math.inf
    last_fn: Optional[float] = None
    last_t: Optional[float] = None

    @classmethod
    def initial(cls, params: EstimatorParams) -> "EstimatorState":
        return cls(
            mu_c_hat=params.mu_c_0,
            p_mu=params.p0,
            r_hat=params.r_0,
            p_r=params.p0,
            mu_s_hat=params.mu_s_0,
            buffer=deque(maxlen=params.n_b),
        )

    def copy(self) -> "EstimatorState":
        return dataclasses.replace(self, buffer=deque(self.buffer, maxlen=self.buffer.maxlen))

    def is_halted(self, t: float) -> bool:
        return t < self.halt_until - HALT_TOLERANCE


@dataclass(frozen=True)
class EstimateRecord:
    """Estimator output for one tick."""

    t: float
    mu_c_hat: float
    mu_s_hat: float
    r_hat: float
    gamma_t: float
    gamma_tau: float
    updated_mu_c: bool = False
    updated_r: bool = False
    halted: bool = False
    in_contact: bool = False
    updated_mu_s: bool = False


@dataclass(frozen=True)
class ContractionViolation:
    """A sampled measurement where the update map expanded a perturbation."""

    measurement: Measurement
    mu_c: float
    delta: float
    error: float


def rls_scalar_update(theta: float, P: float, phi: float, y: float, lam: float) -> Tuple[float, float]:
    """
    One step of exponentially weighted scalar recursive least squares.

    Args:
        theta: Current estimate
        P: Current covariance (> 0)
        phi: Regressor
        y: Observation
        lam: Forgetting factor in (0, 1]

    Returns:
        Tuple of (theta', P')
    """
    gain = P * phi / (lam + phi * phi * P)
    theta_new = theta + gain * (y - phi * theta)
    P_new = (1.0 - gain * phi) * P / lam
    return theta_new, P_new


def _clamp(value: float, bounds: Tuple[float, float]) -> float:
    return min(max(value, bounds[0]), bounds[1])


def _force_gamma_t(meas: Measurement, r_hat: float) -> float:
    # scaled-wrench form: torque divided by the radius estimate
    return meas.f_t / (math.sqrt(meas.f_x ** 2 + meas.f_y ** 2 + (meas.tau / r_hat) ** 2) + FORCE_GAMMA_EPS)


def mu_s_step(state: EstimatorState, meas: Measurement, params: EstimatorParams) -> Tuple[EstimatorState, bool]:
    """
    Buffered static-friction rule for one tick.

    Candidate ratios f_t / (gamma_t f_n) fill a ring buffer whenever gamma_t
    exceeds eps_t; at each stick/slip phase change the estimate becomes the
    mean of the n_a largest candidates and the buffer is cleared. Halted
    ticks neither append nor assign, but still track the phase.

    Returns:
        Tuple of (new state, whether mu_s was assigned this tick)
    """
    state = state.copy()
    halted = state.is_halted(meas.t)
    v_t = meas.v_t

    if scaled_speed(meas.twist, state.r_hat) < ZERO_SPEED:
        gamma_t = _force_gamma_t(meas, state.r_hat)
    else:
        gamma_t = motion_ratios(meas.twist, state.r_hat).gamma_t

    if not gamma_t > params.eps_t:
        return state, False

    if not halted and meas.f_n > 0:
        state.buffer.append(meas.f_t / (gamma_t * meas.f_n))

    slip_onset = state.v_z == 1 and v_t > params.v_s
    stick_onset = state.v_z == 0 and v_t < ZERO_SPEED
    if not (slip_onset or stick_onset):
        return state, False

    assigned = False
    if not halted and state.buffer:
        largest = sorted(state.buffer, reverse=True)[:params.n_a]
        state.mu_s_hat = float(np.mean(largest))
        assigned = True
    state.v_z = 1 - state.v_z
    state.buffer.clear()
    logger.debug(
        "%s at t=%.4f: mu_s=%.4f%s",
        "Slip onset" if slip_onset else "Stick onset", meas.t, state.mu_s_hat, " (halted)" if halted else "",
    )
    return state, assigned


def _validate(state: EstimatorState, meas: Measurement) -> None:
    if not meas.is_finite():
        bad = [f.name for f in dataclasses.fields(meas) if not math.isfinite(getattr(meas, f.name))]
        raise MeasurementError(f"Measurement at t={meas.t} has non-finite field(s): {', '.join(bad)}")
    if state.last_t is not None and not meas.t > state.last_t:
        raise StreamError(f"Timestamp {meas.t} does not follow previous tick {state.last_t}")


def step(state: EstimatorState, meas: Measurement, params: EstimatorParams) -> Tuple[EstimatorState, EstimateRecord]:
    """
    Advance the estimator by one tick.

    Raises:
        MeasurementError: If a field is NaN or infinite
        StreamError: If the timestamp does not increase
    """
    _validate(state, meas)
    state = state.copy()
    previous_fn = state.last_fn
    state.last_fn = meas.f_n
    state.last_t = meas.t

    v = scaled_speed(meas.twist, state.r_hat)
    if v > 0:
        ratios = motion_ratios(meas.twist, state.r_hat)
        gamma_t, gamma_tau = ratios.gamma_t, ratios.gamma_tau
    else:
        gamma_t = gamma_tau = 0.0

    if meas.f_n < params.eps_fn:
        return state, EstimateRecord(meas.t, state.mu_c_hat, state.mu_s_hat, state.r_hat, gamma_t, gamma_tau)

    if params.heuristic_enabled and previous_fn is not None:
        rate = (meas.f_n - previous_fn) / params.delta_t
        if rate > params.eps_delta:
            state.halt_until = meas.t + params.halt_interval
            logger.debug("f_n rising at %.1f N/s at t=%.4f; halting until %.4f", rate, meas.t, state.halt_until)
    halted = state.is_halted(meas.t)

    updated_mu_c = updated_r = False
    if not halted and v > params.eps_v:
        if gamma_t > params.eps_t:
            state.mu_c_hat, state.p_mu = rls_scalar_update(
                state.mu_c_hat, state.p_mu, gamma_t * meas.f_n, meas.f_t, params.lam
            )
            updated_mu_c = True
        if gamma_tau > params.eps_tau:
            state.r_hat, state.p_r = rls_scalar_update(
                state.r_hat, state.p_r, gamma_tau * state.mu_c_hat * meas.f_n, abs(meas.tau), params.lam
            )
            updated_r = True

    state, updated_mu_s = mu_s_step(state, meas, params)

    state.mu_c_hat = _clamp(state.mu_c_hat, config.MU_BOUNDS)
    state.mu_s_hat = _clamp(state.mu_s_hat, config.MU_BOUNDS)
    state.r_hat = _clamp(state.r_hat, config.R_BOUNDS)

    record = EstimateRecord(
        t=meas.t,
        mu_c_hat=state.mu_c_hat,
        mu_s_hat=state.mu_s_hat,
        r_hat=state.r_hat,
        gamma_t=gamma_t,
        gamma_tau=gamma_tau,
        updated_mu_c=updated_mu_c,
        updated_r=updated_r,
        halted=halted,
        in_contact=True,
        updated_mu_s=updated_mu_s,
    )
    return state, record


class FrictionEstimator:
    """Streaming wrapper that owns the state of one measurement stream."""

    def __init__(self, params: Optional[EstimatorParams] = None):
        self.params = params or EstimatorParams()
        self.state = EstimatorState.initial(self.params)

    def reset(self) -> None:
        self.state = EstimatorState.initial(self.params)

    def update(self, meas: Measurement) -> EstimateRecord:
        self.state, record = step(self.state, meas, self.params)
        return record

    @log_execution_time(logger)
    def run(self, measurements: Iterable[Measurement]) -> List[EstimateRecord]:
        """Feed a whole stream and return one record per tick."""
        records = [self.update(meas) for meas in measurements]
        if records:
            logger.info(
                "Estimated %d ticks: mu_c=%.4f mu_s=%.4f r=%.5f (%d halted)",
                len(records), records[-1].mu_c_hat, records[-1].mu_s_hat, records[-1].r_hat,
                sum(rec.halted for rec in records),
            )
        return records


# ---------------------------------------------------------------------------
# Coupled update map
# ---------------------------------------------------------------------------

def _coupling_terms(mu_c: float, meas: Measurement) -> Tuple[float, float]:
    """Return (u, r^2) where u = v_t/|omega| and r solves the torque relation at mu_c."""
    if not (meas.v_t > 0 and meas.omega != 0 and meas.f_n > 0 and meas.tau != 0):
        raise DomainError(
            f"Coupled map needs v_t > 0, omega != 0, f_n > 0 and tau != 0 (t={meas.t})"
        )
    if not mu_c > 0:
        raise DomainError(f"mu_c must be positive, got {mu_c}")
    k = abs(meas.tau) / (mu_c * meas.f_n)
    u = meas.v_t / abs(meas.omega)
    # r^2 / sqrt(u^2 + r^2) = k  =>  s^2 - k^2 s - k^2 u^2 = 0 with s = r^2
    s = 0.5 * k * k + k * math.sqrt(0.25 * k * k + u * u)
    if not (math.isfinite(s) and s >= 0):
        raise DomainError(f"No non-negative radius for mu_c={mu_c} at t={meas.t}")
    return u, s


def coupled_radius(mu_c: float, meas: Measurement) -> float:
    """Radius implied by the torque for a trial mu_c."""
    _, s = _coupling_terms(mu_c, meas)
    return math.sqrt(s)


def coupled_gamma_t(mu_c: float, meas: Measurement) -> float:
    """Linear motion ratio evaluated at coupled_radius(mu_c)."""
    u, s = _coupling_terms(mu_c, meas)
    return u / math.sqrt(u * u + s)


def fixed_point_map(mu_c: float, meas: Measurement) -> float:
    """
    The coupled mu_c update map f_t / (f_n gamma_t(mu_c)).

    Its fixed point is the true mu_c for ellipsoid-consistent measurements.

    Raises:
        DomainError: If the measurement lacks linear or rotational coupling
    """
    return meas.f_t / (meas.f_n * coupled_gamma_t(mu_c, meas))


def check_contraction(
    samples: Sequence[Tuple[Measurement, float]],
    rel_deltas: Sequence[float] = (-0.2, -0.1, 0.1, 0.2),
) -> List[ContractionViolation]:
    """
    Check |T(mu_c + delta) - mu_c| < |delta| over sampled measurements.

    Args:
        samples: Pairs of (measurement, true mu_c)
        rel_deltas: Perturbations relative to the true mu_c

    Returns:
        Violating cases; each is also logged at WARNING
    """
    violations = []
    for meas, mu_c in samples:
        for rel in rel_deltas:
            delta = rel * mu_c
            error = abs(fixed_point_map(mu_c + delta, meas) - mu_c)
            if not error < abs(delta):
                violation = ContractionViolation(meas, mu_c, delta, error)
                violations.append(violation)
                logger.warning(
                    "Update map expands delta=%.4g at mu_c=%.4g: error %.4g for %s", delta, mu_c, error, meas
                )
    logger.info("Contraction check: %d violation(s) in %d cases", len(violations), len(samples) * len(rel_deltas))
    return violations


# ---------------------------------------------------------------------------
# Estimate files
# ---------------------------------------------------------------------------

def records_to_frame(records: Sequence[EstimateRecord]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [
            [rec.t, rec.mu_c_hat, rec.mu_s_hat, rec.r_hat, rec.gamma_t, rec.gamma_tau,
             rec.updated_mu_c, rec.updated_r, rec.halted, rec.in_contact, rec.updated_mu_s]
            for rec in records
        ],
        columns=ESTIMATE_COLUMNS,
    )
    frame[FLAG_COLUMNS] = frame[FLAG_COLUMNS].astype(int)
    return frame


def write_estimates_csv(
    records: Sequence[EstimateRecord],
    path: Union[str, Path],
    truth: Optional[pd.DataFrame] = None,
) -> Path:
    """
    Write one row per tick; with a truth frame (t, mu_s, mu_c, r) also write
    estimate-minus-truth columns using the latest truth sample at each tick.
    """
    frame = records_to_frame(records)
    if truth is not None and len(frame):
        truth_t = truth["t"].to_numpy()
        index = np.searchsorted(truth_t, frame["t"].to_numpy(), side="right") - 1
        index = np.clip(index, 0, len(truth_t) - 1)
        frame["err_mu_c"] = frame["mu_c"].to_numpy() - truth["mu_c"].to_numpy()[index]
        frame["err_mu_s"] = frame["mu_s"].to_numpy() - truth["mu_s"].to_numpy()[index]
        frame["err_r"] = frame["r"].to_numpy() - truth["r"].to_numpy()[index]
    with atomic_output(path) as tmp:
        frame.to_csv(tmp, index=False, float_format=config.CSV_FLOAT_FORMAT, lineterminator="\n")
    return Path(path)


def read_estimates_csv(path: Union[str, Path]) -> List[EstimateRecord]:
    """Read records written by write_estimates_csv."""
    frame = pd.read_csv(path)
    missing = [column for column in ESTIMATE_COLUMNS if column not in frame.columns]
    if missing:
        raise TraceSchemaError(f"Estimate file {path} is missing column '{missing[0]}'", str(path), missing[0])
    return [
        EstimateRecord(
            t=float(row.t),
            mu_c_hat=float(row.mu_c),
            mu_s_hat=float(row.mu_s),
            r_hat=float(row.r),
            gamma_t=float(row.gamma_t),
            gamma_tau=float(row.gamma_tau),
            updated_mu_c=bool(row.updated_mu_c),
            updated_r=bool(row.updated_r),
            halted=bool(row.halted),
            in_contact=bool(row.in_contact),
            updated_mu_s=bool(row.updated_mu_s),
        )
        for row in frame.itertuples(index=False)
    ]
