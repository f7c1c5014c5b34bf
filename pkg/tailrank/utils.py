import csv
import logging
import sys
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import UsageError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """
    Format a scalar for key=value reports and CSV cells.

    Floats use repr, which round-trips exactly and is platform independent.

    Args:
        value: Scalar to format

    Returns:
        Text form of the value
    """
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    return str(value)


def header_lines(settings: Mapping[str, Any]) -> List[str]:
    """Render resolved settings as '#'-prefixed comment lines, sorted by key."""
    return [f"# {key}={format_value(settings[key])}" for key in sorted(settings)]


def render_key_values(pairs: Sequence[Tuple[str, Any]], header: Optional[Mapping[str, Any]] = None) -> str:
    lines = header_lines(header) if header else []
    lines.extend(f"{key}={format_value(value)}" for key, value in pairs)
    return "\n".join(lines) + "\n"


def write_text(path: Optional[PathLike], text: str) -> None:
    """
    Write text as UTF-8 with LF endings, or to stdout when path is None.

    Args:
        path: Destination file, or None for stdout
        text: Content to write
    """
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {target}")


def write_key_values(path: Optional[PathLike], pairs: Sequence[Tuple[str, Any]],
                     header: Optional[Mapping[str, Any]] = None) -> None:
    write_text(path, render_key_values(pairs, header))


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """
    Write a CSV file with a header row.

    Args:
        path: Destination file
        columns: Header names
        rows: Row sequences; cells go through format_value
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([format_value(cell) for cell in row])
            count += 1
    logger.info(f"Wrote {count} rows to {target}")


def parse_key_values(text: str) -> dict:
    """Parse key=value report text, skipping '#' comment lines."""
    result = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        result[key] = value
    return result


def parse_int_list(text: str) -> List[int]:
    """Parse a comma-separated list of integers such as '1,3,5'."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise UsageError("empty integer list")
    return values


def parse_float_list(text: str) -> List[float]:
    """Parse a comma-separated list of reals such as '0.2,0.4'."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise UsageError("empty number list")
    return values
