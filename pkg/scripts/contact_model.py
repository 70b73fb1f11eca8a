"""
Planar contact model: kinematic ratios, the ellipsoid limit surface of a rim
contact, and a numerically integrated limit surface for arbitrary pressure
distributions.

Twists are expressed at the center of pressure (CoP), which is the origin of
every distribution; torques are about the contact normal through the CoP.
"""
import abc
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import CSV_FLOAT_FORMAT, DEFAULT_EPS_V, DEFAULT_GRID_RESOLUTION, DEFAULT_RIM_POINTS
from .exceptions import (
    ConfigurationError,
    DegenerateTwistError,
    DomainError,
    RegimeError,
    UndefinedRatiosError,
)
from .utils.general import atomic_output

logger = logging.getLogger(__name__)

MIN_GRID_RESOLUTION = 32
MIN_SWEEP_DIRECTIONS = 8
DEFAULT_SWEEP_DIRECTIONS = 33
GRID_COP_TOLERANCE = 1e-9  # m
# Cells slower than this fraction of the fastest cell sit on the rotation center.
STATIONARY_CELL_FRACTION = 1e-12

SWEEP_COLUMNS = ["gamma_t", "gamma_tau", "ft_over_mufn", "tau_over_mufnr"]


@dataclass(frozen=True)
class PlanarTwist:
    """In-plane slip velocity of the object at the contact."""

    v_x: float  # m/s
    v_y: float  # m/s
    omega: float  # rad/s

    def __post_init__(self):
        if not all(math.isfinite(value) for value in (self.v_x, self.v_y, self.omega)):
            raise DomainError(f"Twist fields must be finite, got {self}")

    @property
    def linear_speed(self) -> float:
        """v_t, the norm of the linear velocity."""
        return math.hypot(self.v_x, self.v_y)

    def scaled(self, factor: float) -> "PlanarTwist":
        return PlanarTwist(self.v_x * factor, self.v_y * factor, self.omega * factor)

    def is_zero(self) -> bool:
        return self.v_x == 0.0 and self.v_y == 0.0 and self.omega == 0.0


@dataclass(frozen=True)
class ContactParams:
    """Static friction, Coulomb friction and effective rim radius."""

    mu_s: float
    mu_c: float
    r: float  # m

    def __post_init__(self):
        if not all(math.isfinite(value) for value in (self.mu_s, self.mu_c, self.r)):
            raise DomainError(f"Contact parameters must be finite, got {self}")
        if not self.mu_c > 0:
            raise DomainError(f"mu_c must be positive, got {self.mu_c}")
        if self.mu_s < self.mu_c:
            raise DomainError(f"mu_s ({self.mu_s}) must not be below mu_c ({self.mu_c})")
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")


@dataclass(frozen=True)
class MotionRatios:
    """Fractions of the scaled-twist norm due to linear and rotational motion."""

    gamma_t: float
    gamma_tau: float


@dataclass(frozen=True)
class FrictionWrench:
    """Friction force and torque acting on the object at the CoP."""

    f_x: float  # N
    f_y: float  # N
    tau: float  # N*m

    @property
    def f_t(self) -> float:
        """Tangential force magnitude."""
        return math.hypot(self.f_x, self.f_y)

    def power(self, twist: PlanarTwist) -> float:
        """Mechanical power of the wrench on the twist (non-positive for friction)."""
        return self.f_x * twist.v_x + self.f_y * twist.v_y + self.tau * twist.omega


@dataclass(frozen=True)
class LimitSurfacePoint:
    """One direction of a normalized limit-surface sweep."""

    gamma_t: float
    gamma_tau: float
    ft_over_mufn: float
    tau_over_mufnr: float


# ---------------------------------------------------------------------------
# Pressure distributions
# ---------------------------------------------------------------------------

class PressureDistribution(abc.ABC):
    """Normal pressure over the contact patch, normalized to unit total load."""

    @abc.abstractmethod
    def discretize(self, resolution: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Return cell positions (N, 2) in meters and weights (N,) summing to 1."""

    def analytic_effective_radius(self) -> Optional[float]:
        """Closed-form effective radius, or None when only quadrature applies."""
        return None

    @abc.abstractmethod
    def describe(self) -> str:
        """Short text form, e.g. ``uniform:0.015``."""


@lru_cache(maxsize=32)
def _disc_cells(radius: float, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    # cell-center quadrature on the bounding square; symmetric so the CoP is the origin
    edges = np.linspace(-radius, radius, resolution + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    xx, yy = np.meshgrid(centers, centers, indexing="xy")
    inside = xx ** 2 + yy ** 2 <= radius ** 2
    points = np.column_stack([xx[inside], yy[inside]])
    weights = np.full(points.shape[0], 1.0 / points.shape[0])
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


@lru_cache(maxsize=32)
def _rim_cells(radius: float, n_points: int) -> Tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * np.arange(n_points) / n_points
    points = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    weights = np.full(n_points, 1.0 / n_points)
    points.setflags(write=False)
    weights.setflags(write=False)
    return points, weights


@dataclass(frozen=True)
class UniformDisc(PressureDistribution):
    """Uniform pressure over a disc of radius R."""

    R: float  # m

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise DomainError(f"Disc radius must be positive, got {self.R}")

    def discretize(self, resolution: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        resolution = DEFAULT_GRID_RESOLUTION if resolution is None else int(resolution)
        if resolution < MIN_GRID_RESOLUTION:
            raise DomainError(f"Grid resolution must be at least {MIN_GRID_RESOLUTION}, got {resolution}")
        return _disc_cells(self.R, resolution)

    def analytic_effective_radius(self) -> float:
        return 2.0 * self.R / 3.0

    def describe(self) -> str:
        return f"uniform:{self.R:g}"


@dataclass(frozen=True)
class Rim(PressureDistribution):
    """All pressure on a circle of radius r."""

    r: float  # m
    n_points: int = DEFAULT_RIM_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"Rim radius must be positive, got {self.r}")
        if self.n_points < 8:
            raise DomainError(f"Rim needs at least 8 points, got {self.n_points}")

    def discretize(self, resolution: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        return _rim_cells(self.r, self.n_points)

    def analytic_effective_radius(self) -> float:
        return self.r

    def describe(self) -> str:
        return f"rim:{self.r:g}"


@dataclass(frozen=True)
class Grid(PressureDistribution):
    """Discrete pressure cells given as (x, y, weight) triples."""

    cells: Tuple[Tuple[float, float, float], ...]

    def __post_init__(self):
        cells = tuple(tuple(float(v) for v in cell) for cell in self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells:
            raise DomainError("Grid needs at least one cell")
        if any(len(cell) != 3 for cell in cells):
            raise DomainError("Grid cells must be (x, y, weight) triples")
        data = np.asarray(cells, dtype=float)
        if not np.all(np.isfinite(data)):
            raise DomainError("Grid cells must be finite")
        weights = data[:, 2]
        if np.any(weights < 0):
            raise DomainError("Grid weights must be non-negative")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise DomainError(f"Grid weights must sum to 1, got {weights.sum():.12g}")
        cop = weights @ data[:, :2]
        if np.hypot(*cop) > GRID_COP_TOLERANCE:
            raise DomainError(
                f"Grid CoP ({cop[0]:.3g}, {cop[1]:.3g}) is off the origin; build it with Grid.from_points to re-centre"
            )

    @classmethod
    def from_points(cls, points: Sequence[Tuple[float, float]], weights: Optional[Sequence[float]] = None) -> "Grid":
        """Cells at ``points``; weights are renormalized and the cells shifted so the CoP is the origin."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if points.shape[0] == 0:
            raise DomainError("Grid needs at least one cell")
        if weights is None:
            weights = np.full(points.shape[0], 1.0 / points.shape[0])
        else:
            weights = np.asarray(weights, dtype=float)
            total = weights.sum()
            if total <= 0:
                raise DomainError("Grid weights must have a positive sum")
            weights = weights / total
        if np.all(np.isfinite(points)) and np.all(np.isfinite(weights)):
            cop = weights @ points
            if np.hypot(*cop) > GRID_COP_TOLERANCE:
                logger.info("Re-centring grid on its CoP at (%.4g, %.4g)", *cop)
                points = points - cop
        return cls(tuple((float(x), float(y), float(w)) for (x, y), w in zip(points, weights)))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Grid":
        """Read cells from a CSV with columns ``x,y,weight``; weights are renormalized."""
        frame = pd.read_csv(path)
        missing = [column for column in ("x", "y", "weight") if column not in frame.columns]
        if missing:
            raise ConfigurationError(f"Grid file {path} is missing column '{missing[0]}'", key=missing[0])
        return cls.from_points(frame[["x", "y"]].to_numpy(), frame["weight"].to_numpy())

    def discretize(self, resolution: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        data = np.asarray(self.cells, dtype=float)
        return data[:, :2], data[:, 2]

    def describe(self) -> str:
        return f"grid:{len(self.cells)}"


def parse_distribution(spec: str) -> PressureDistribution:
    """
    Parse a distribution spec: ``uniform:<R>``, ``rim:<r>`` or ``grid:<csv path>``.

    Raises:
        ConfigurationError: If the spec is malformed
    """
    kind, _, value = spec.partition(":")
    kind = kind.strip().lower()
    if not value:
        raise ConfigurationError(f"Distribution spec needs a value, got '{spec}'", key="dist")
    try:
        if kind in ("uniform", "disc"):
            return UniformDisc(float(value))
        if kind == "rim":
            return Rim(float(value))
    except ValueError as e:
        raise ConfigurationError(f"Invalid distribution spec '{spec}': {e}", key="dist") from e
    if kind == "grid":
        return Grid.from_csv(value)
    raise ConfigurationError(f"Unknown distribution kind '{kind}' in '{spec}'", key="dist")


# ---------------------------------------------------------------------------
# Kinematics and the ellipsoid model
# ---------------------------------------------------------------------------

def scaled_speed(twist: PlanarTwist, r: float) -> float:
    """Norm of the scaled twist [v_x, v_y, r*omega]."""
    if not r > 0:
        raise DomainError(f"Radius must be positive, got {r}")
    return math.sqrt(twist.v_x ** 2 + twist.v_y ** 2 + (r * twist.omega) ** 2)


def motion_ratios(twist: PlanarTwist, r: float) -> MotionRatios:
    """
    Linear and rotational fractions of the scaled twist.

    Raises:
        UndefinedRatiosError: If the scaled twist is zero
    """
    v = scaled_speed(twist, r)
    if v == 0.0:
        raise UndefinedRatiosError("Motion ratios are undefined for a zero twist")
    return MotionRatios(gamma_t=twist.linear_speed / v, gamma_tau=abs(r * twist.omega) / v)


def motion_ratios_array(v_x, v_y, omega, r) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized motion_ratios; entries with zero scaled speed yield NaN."""
    v_x, v_y, omega, r = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (v_x, v_y, omega, r)))
    if np.any(r <= 0):
        raise DomainError("Radius must be positive")
    v_t = np.hypot(v_x, v_y)
    rw = np.abs(r * omega)
    v = np.sqrt(v_t ** 2 + rw ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        return v_t / v, rw / v


def ellipsoid_wrench(
    twist: PlanarTwist,
    fn: float,
    params: ContactParams,
    eps_v: float = DEFAULT_EPS_V,
) -> FrictionWrench:
    """
    Friction wrench of a rim contact using the ellipsoid limit surface.

    The force opposes the linear velocity and the torque opposes omega.

    Raises:
        DomainError: If fn is negative
        RegimeError: If the scaled speed is at or below eps_v
    """
    if not fn >= 0:
        raise DomainError(f"Normal force must be non-negative, got {fn}")
    v = scaled_speed(twist, params.r)
    if v <= eps_v:
        raise RegimeError(f"Scaled speed {v:.3g} m/s is within the stiction band (eps_v={eps_v:g})")

    ratios = motion_ratios(twist, params.r)
    f_t = ratios.gamma_t * fn * params.mu_c
    tau_mag = ratios.gamma_tau * params.mu_c * fn * params.r

    v_t = twist.linear_speed
    if v_t > 0:
        f_x = -f_t * twist.v_x / v_t
        f_y = -f_t * twist.v_y / v_t
    else:
        f_x = f_y = 0.0
    tau = -math.copysign(tau_mag, twist.omega) if twist.omega != 0 else 0.0
    return FrictionWrench(f_x=f_x, f_y=f_y, tau=tau)


# ---------------------------------------------------------------------------
# Numeric limit surface
# ---------------------------------------------------------------------------

def limit_surface_numeric(
    dist: PressureDistribution,
    twist: PlanarTwist,
    mu_c: float,
    fn: float,
    resolution: Optional[int] = None,
) -> FrictionWrench:
    """
    Integrate Coulomb friction over the pressure cells for a rigid twist.

    Each cell at x moves with (v_x - omega*y, v_y + omega*x) and carries
    mu_c * p(x) opposite its own velocity.

    Raises:
        DegenerateTwistError: If no cell moves
    """
    points, weights = dist.discretize(resolution)
    x = points[:, 0]
    y = points[:, 1]
    cell_vx = twist.v_x - twist.omega * y
    cell_vy = twist.v_y + twist.omega * x
    speed = np.hypot(cell_vx, cell_vy)
    fastest = speed.max() if speed.size else 0.0
    if not fastest > 0:
        raise DegenerateTwistError(f"No contact cell moves under {twist}")

    moving = speed > fastest * STATIONARY_CELL_FRACTION
    safe_speed = np.where(moving, speed, 1.0)
    ux = np.where(moving, cell_vx / safe_speed, 0.0)
    uy = np.where(moving, cell_vy / safe_speed, 0.0)

    scale = mu_c * fn
    f_x = -scale * float(weights @ ux)
    f_y = -scale * float(weights @ uy)
    tau = -scale * float(weights @ (x * uy - y * ux))
    return FrictionWrench(f_x=f_x, f_y=f_y, tau=tau)


def effective_radius(
    dist: PressureDistribution,
    numeric: bool = False,
    resolution: Optional[int] = None,
) -> float:
    """
    Rim radius whose maximum friction torque matches the distribution's.

    Uses the closed form when the distribution has one, unless numeric is set.
    """
    if not numeric:
        analytic = dist.analytic_effective_radius()
        if analytic is not None:
            return analytic
    points, weights = dist.discretize(resolution)
    return float(weights @ np.hypot(points[:, 0], points[:, 1]))


def sweep_twists(r_eff: float, n_dirs: int = DEFAULT_SWEEP_DIRECTIONS, speed: float = 1.0) -> List[PlanarTwist]:
    """Twists from pure linear to pure rotation, evenly spaced in scaled-twist angle."""
    angles = np.linspace(0.0, 0.5 * np.pi, n_dirs)
    return [PlanarTwist(speed * math.cos(a), 0.0, speed * math.sin(a) / r_eff) for a in angles]


def wrench_residual(
    dist: PressureDistribution,
    twist: PlanarTwist,
    resolution: Optional[int] = None,
    r_eff: Optional[float] = None,
) -> float:
    """Relative norm difference between numeric and ellipsoid wrenches for one twist."""
    r_eff = effective_radius(dist) if r_eff is None else r_eff
    numeric = limit_surface_numeric(dist, twist, 1.0, 1.0, resolution)
    ellipsoid = ellipsoid_wrench(twist, 1.0, ContactParams(mu_s=1.0, mu_c=1.0, r=r_eff), eps_v=0.0)
    diff = np.array([numeric.f_x - ellipsoid.f_x, numeric.f_y - ellipsoid.f_y, (numeric.tau - ellipsoid.tau) / r_eff])
    ref = np.array([ellipsoid.f_x, ellipsoid.f_y, ellipsoid.tau / r_eff])
    return float(np.linalg.norm(diff) / np.linalg.norm(ref))


def ellipsoid_residual(
    dist: PressureDistribution,
    n_dirs: int = DEFAULT_SWEEP_DIRECTIONS,
    resolution: Optional[int] = None,
) -> float:
    """
    Worst relative wrench error of the ellipsoid against the numeric limit
    surface over a sweep from pure linear motion to pure rotation.
    """
    if n_dirs < MIN_SWEEP_DIRECTIONS:
        raise DomainError(f"Sweep needs at least {MIN_SWEEP_DIRECTIONS} directions, got {n_dirs}")
    r_eff = effective_radius(dist)
    residuals = [wrench_residual(dist, twist, resolution, r_eff) for twist in sweep_twists(r_eff, n_dirs)]
    worst = max(residuals)
    logger.debug("Ellipsoid residual for %s over %d directions: %.4f", dist.describe(), n_dirs, worst)
    return worst


def sweep_limit_surface(
    dist: PressureDistribution,
    n_dirs: int = DEFAULT_SWEEP_DIRECTIONS,
    resolution: Optional[int] = None,
) -> List[LimitSurfacePoint]:
    """Normalized numeric limit surface, one point per sweep direction."""
    if n_dirs < 2:
        raise DomainError(f"Sweep needs at least 2 directions, got {n_dirs}")
    r_eff = effective_radius(dist)
    points = []
    for twist in sweep_twists(r_eff, n_dirs):
        ratios = motion_ratios(twist, r_eff)
        wrench = limit_surface_numeric(dist, twist, 1.0, 1.0, resolution)
        points.append(LimitSurfacePoint(
            gamma_t=ratios.gamma_t,
            gamma_tau=ratios.gamma_tau,
            ft_over_mufn=wrench.f_t,
            tau_over_mufnr=abs(wrench.tau) / r_eff,
        ))
    return points


def write_sweep_csv(points: Sequence[LimitSurfacePoint], path: Union[str, Path]) -> Path:
    """Write a limit-surface sweep with header gamma_t,gamma_tau,ft_over_mufn,tau_over_mufnr."""
    frame = pd.DataFrame(
        [[p.gamma_t, p.gamma_tau, p.ft_over_mufn, p.tau_over_mufnr] for p in points],
        columns=SWEEP_COLUMNS,
    )
    with atomic_output(path) as tmp:
        frame.to_csv(tmp, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return Path(path)
