"""Utility functions for writing run outputs."""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np


def create_output_dir(path: Union[str, Path]) -> Path:
    """Create the output directory (and parents) if needed.

    Args:
        path: Directory to create.

    Returns:
        The directory as a Path.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def format_number(value: Any) -> str:
    """Format a CSV cell.

    Booleans become 0/1, integers print as integers, and floats use the
    shortest representation that round-trips, so -inf prints as '-inf'.

    Args:
        value: Cell value.

    Returns:
        The cell text.
    """
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Union[str, Path], header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> Path:
    """Write a header row and data rows with '\\n' line endings.

    Args:
        path: Destination file.
        header: Column names.
        rows: Data rows; every cell goes through format_number.

    Returns:
        The path written.
    """
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(
                    f"row has {len(row)} cells, header has {len(header)}"
                )
            writer.writerow([format_number(cell) for cell in row])
    return path


def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Read a CSV written by write_csv into a list of dicts."""
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_manifest(path: Union[str, Path], manifest: Dict[str, Any]) -> Path:
    """Write a run manifest as indented JSON.

    Non-finite floats are written as strings so the file stays valid JSON.
    """
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_json_safe(manifest), f, indent=2)
        f.write('\n')
    return path


def parse_grid(text: str):
    """Parse 'lo:hi:count' into (lo, hi, count).

    Raises:
        ValueError: If the text is not three colon-separated numbers.
    """
    parts = text.split(':')
    if len(parts) != 3:
        raise ValueError(f"grid must look like lo:hi:count, got '{text}'")
    return float(parts[0]), float(parts[1]), int(parts[2])
