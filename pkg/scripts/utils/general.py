"""
General utility functions for the friction toolkit pipeline.
"""
import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Union

import yaml

logger = logging.getLogger(__name__)


def get_output_path(out_dir: Union[str, Path], name: str, suffix: str) -> Path:
    """
    Get the output path for one file of an output set.

    Args:
        out_dir: Output directory (created if missing)
        name: Output set name, e.g. the trial name
        suffix: File suffix including extension, e.g. ``_force.csv``

    Returns:
        Path object for the output file
    """
    output_dir = Path(out_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir / f"{name}{suffix}"


@contextmanager
def atomic_output(path: Union[str, Path]) -> Iterator[Path]:
    """
    Yield a temporary path next to ``path`` and rename it into place on success.

    Readers never observe a partially written file; on error the temporary
    file is removed and ``path`` is left untouched.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent))
    os.close(fd)
    tmp_path = Path(tmp_name)
    try:
        yield tmp_path
        os.replace(tmp_path, target)
        logger.debug("Wrote %s", target)
    except BaseException:
        if tmp_path.exists():
            tmp_path.unlink()
        raise


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write text to ``path`` via write-then-rename."""
    with atomic_output(path) as tmp:
        tmp.write_text(text, encoding="utf-8")
    return Path(path)


def write_manifest(path: Union[str, Path], manifest: Dict[str, Any]) -> Path:
    """Write a run manifest as YAML."""
    text = yaml.safe_dump(manifest, sort_keys=False, default_flow_style=False)
    return atomic_write_text(path, text)


def read_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a run manifest written by write_manifest."""
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}

