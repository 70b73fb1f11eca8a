"""
Logging configuration for the friction estimation toolkit.

This module provides default logging configuration and utilities.
"""
import os
from pathlib import Path
from typing import Any, Dict, Optional

# Base directory for logs
LOG_DIR = Path("logs")

# Default log file paths
DEFAULT_LOG_FILE = LOG_DIR / "friction_tool.log"
ERROR_LOG_FILE = LOG_DIR / "friction_tool_errors.log"


def get_logging_config(debug: bool = False, log_file: Optional[str] = None) -> Dict[str, Any]:
    """
    Get logging configuration dictionary.

    Args:
        debug: Whether to enable debug logging
        log_file: Rotating log file; no file handlers when omitted

    Returns:
        Dictionary with logging configuration
    """
    log_level = "DEBUG" if debug else os.getenv("LOG_LEVEL", "INFO")

    handlers: Dict[str, Any] = {
        "console": {
            "class": "logging.StreamHandler",
            "level": log_level,
            "formatter": "colored",
            "stream": "ext://sys.stderr"
        }
    }
    root_handlers = ["console"]

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        error_path = log_path.with_name(f"{log_path.stem}_errors{log_path.suffix or '.log'}")
        handlers["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": log_level,
            "formatter": "standard",
            "filename": str(log_path.absolute()),
            "maxBytes": 10 * 1024 * 1024,  # 10 MB
            "backupCount": 5,
            "encoding": "utf8"
        }
        handlers["error_file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": "ERROR",
            "formatter": "detailed",
            "filename": str(error_path.absolute()),
            "maxBytes": 10 * 1024 * 1024,  # 10 MB
            "backupCount": 5,
            "encoding": "utf8"
        }
        root_handlers += ["file", "error_file"]

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S"
            },
            "detailed": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S"
            },
            "colored": {
                "()": "colorlog.ColoredFormatter",
                "format": "%(log_color)s%(asctime)s - %(name)s - %(levelname)s%(reset)s - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S"
            }
        },
        "handlers": handlers,
        "loggers": {
            "": {  # root logger
                "handlers": root_handlers,
                "level": log_level,
                "propagate": True
            }
        }
    }
