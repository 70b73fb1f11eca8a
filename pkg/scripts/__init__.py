"""
In-hand friction estimation scripts package.
"""

__version__ = "1.0.0"

# Import main components for easier access
from .contact_model import (
    ContactParams,
    PlanarTwist,
    Rim,
    UniformDisc,
    Grid,
    effective_radius,
    ellipsoid_wrench,
    limit_surface_numeric,
)
from .estimator import EstimatorParams, FrictionEstimator, Measurement
from .simulator import ScenarioSegment, SimConfig, make_paper_like_scenario, run_scenario
from .utils.logging_utils import setup_logger

__all__ = [
    "ContactParams",
    "PlanarTwist",
    "Rim",
    "UniformDisc",
    "Grid",
    "effective_radius",
    "ellipsoid_wrench",
    "limit_surface_numeric",
    "EstimatorParams",
    "FrictionEstimator",
    "Measurement",
    "ScenarioSegment",
    "SimConfig",
    "make_paper_like_scenario",
    "run_scenario",
    "setup_logger",
]
