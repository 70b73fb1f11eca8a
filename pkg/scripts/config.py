"""
Configuration and environment variable handling for the friction toolkit.

Estimator defaults come from the reference parameter set; simulator defaults
match the 1 kHz wrench / 120 Hz slip-velocity sensor pair.
"""
import dataclasses
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Type, TypeVar, Union

import yaml
from dotenv import load_dotenv

from .exceptions import ConfigurationError

logger = logging.getLogger(__name__)

# Load environment variables from .env file if it exists
load_dotenv()

# Base directory of the project
BASE_DIR = Path(__file__).parent.parent

# Estimator defaults
DEFAULT_MU_C_0 = 1.3
DEFAULT_R_0 = 0.02  # m
DEFAULT_MU_S_0 = 1.5
DEFAULT_EPS_TAU = 0.3
DEFAULT_EPS_T = 0.3
DEFAULT_EPS_V = 1.5e-3  # m/s
DEFAULT_EPS_FN = 0.2  # N
DEFAULT_P0 = 1.0
DEFAULT_LAMBDA = 0.98
DEFAULT_N_B = 16
DEFAULT_N_A = 2
DEFAULT_EPS_DELTA = 150.0  # N/s
DEFAULT_HALT_INTERVAL = 0.05  # s
DEFAULT_DELTA_T = 1.0 / 120.0  # s

# Parameter-file keys whose EstimatorParams field is named differently
ESTIMATOR_KEY_ALIASES = {"P0": "p0", "lambda": "lam", "Delta_t": "halt_interval"}

# Estimate clamp bounds
MU_BOUNDS = (1e-4, 10.0)
R_BOUNDS = (1e-4, 1.0)  # m

# Simulator defaults
DEFAULT_DT_SIM = 1e-3  # s
DEFAULT_FORCE_RATE = 1000.0  # Hz
DEFAULT_VELOCITY_RATE = 120.0  # Hz

# Quadrature defaults
DEFAULT_GRID_RESOLUTION = 64
DEFAULT_RIM_POINTS = 256

# CSV precision (significant digits)
CSV_FLOAT_FORMAT = "%.9g"

T = TypeVar("T")


def get_env_variable(name: str, default: Optional[str] = None) -> str:
    """Get environment variable or raise an error if not found and no default provided."""
    value = os.getenv(name, default)
    if value is None:
        raise ConfigurationError(f"Required environment variable {name} is not set", key=name)
    return value


def get_default_seed() -> int:
    """Seed used when no --seed is given (FRICTION_SEED, default 0)."""
    raw = get_env_variable("FRICTION_SEED", "0")
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigurationError(f"FRICTION_SEED must be an integer, got {raw!r}", key="FRICTION_SEED") from e


def is_debug() -> bool:
    """Check if debug mode is enabled."""
    return os.getenv("DEBUG", "false").lower() == "true"


def load_yaml_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a YAML mapping from disk.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ConfigurationError: If the file is not valid YAML or not a mapping
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    try:
        logger.info("Loading configuration from: %s", path)
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Error parsing YAML config at {path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"Invalid configuration format in {path}: expected a mapping")
    return data


def _coerce(value: Any, target: Any, key: str) -> Any:
    """Coerce a YAML/CLI value to the annotated field type."""
    if isinstance(target, str):
        target = {"float": float, "int": int, "bool": bool, "str": str}.get(target, target)
    try:
        if target is bool:
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered in ("true", "1", "yes", "on"):
                    return True
                if lowered in ("false", "0", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if target is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if target is float:
            return float(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid value for '{key}': {value!r}", key=key) from e
    return value


def dataclass_from_mapping(
    cls: Type[T], mapping: Dict[str, Any], source: str = "config", aliases: Optional[Dict[str, str]] = None
) -> T:
    """
    Build a dataclass from a mapping with exactly its field names.

    Absent fields keep their defaults; unknown keys and bad values raise
    ConfigurationError naming the key. With ``aliases`` (file key -> field
    name) the aliased fields are only reachable through their file key.
    """
    aliases = aliases or {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs: Dict[str, Any] = {}
    for key, value in mapping.items():
        name = aliases.get(key, key)
        if name not in fields or (key == name and name in aliases.values()):
            raise ConfigurationError(f"Unknown key '{key}' in {source}", key=key)
        kwargs[name] = _coerce(value, fields[name].type, key)
    try:
        return cls(**kwargs)
    except ConfigurationError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid {source}: {e}") from e


def parse_overrides(pairs: Optional[Iterable[str]]) -> Dict[str, str]:
    """Parse ``key=value`` command-line overrides into a mapping."""
    overrides: Dict[str, str] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigurationError(f"Override must look like key=value, got '{pair}'", key=pair)
        key, value = pair.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"Override has an empty key: '{pair}'", key=pair)
        overrides[key] = value.strip()
    return overrides


def load_estimator_params(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None):
    """
    Load estimator parameters from a YAML file.

    File and override keys use the parameter-table names, so the RLS
    covariance, forgetting factor and halt interval are ``P0``, ``lambda``
    and ``Delta_t``.

    Args:
        path: Parameter file; None uses the built-in defaults
        overrides: Extra field values applied after the file

    Returns:
        EstimatorParams instance
    """
    from .estimator import EstimatorParams

    mapping: Dict[str, Any] = {}
    source = "estimator parameters"
    if path is not None:
        mapping.update(load_yaml_file(path))
        source = str(path)
    mapping.update(overrides or {})
    return dataclass_from_mapping(EstimatorParams, mapping, source, ESTIMATOR_KEY_ALIASES)


def estimator_params_to_mapping(params: Any) -> Dict[str, Any]:
    """Parameter values keyed as in a parameter file."""
    file_keys = {name: key for key, name in ESTIMATOR_KEY_ALIASES.items()}
    return {file_keys.get(name, name): value for name, value in params.to_dict().items()}


def load_scenario(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> Tuple[List[Any], Any]:
    """
    Load a scenario file.

    The file holds a ``config`` mapping of SimConfig fields and a ``segments``
    list; see docs/CONFIGURATION.md for the keys.

    Returns:
        Tuple of (segments, SimConfig)
    """
    from .simulator import segment_from_mapping, sim_config_from_mapping

    data = load_yaml_file(path)
    unknown = set(data) - {"config", "segments"}
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"Unknown top-level key '{key}' in {path}", key=key)

    raw_segments = data.get("segments")
    if not raw_segments or not isinstance(raw_segments, list):
        raise ConfigurationError(f"Scenario {path} has no 'segments' list", key="segments")

    segments = [segment_from_mapping(raw, index) for index, raw in enumerate(raw_segments)]
    config_mapping = dict(data.get("config") or {})
    config_mapping.update(overrides or {})
    return segments, sim_config_from_mapping(config_mapping, str(path))
