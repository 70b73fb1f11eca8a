"""
Utility functions for the friction estimation toolkit.
"""

# Import key utilities to make them available at the package level
from .logging_utils import setup_logger, log_execution_time
from .general import (
    atomic_output,
    atomic_write_text,
    get_output_path,
    read_manifest,
    write_manifest,
)

__all__ = [
    # Logging utilities
    'setup_logger',
    'log_execution_time',

    # General utilities
    'atomic_output',
    'atomic_write_text',
    'get_output_path',
    'read_manifest',
    'write_manifest',
]
