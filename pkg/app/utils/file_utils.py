# -*- coding: utf-8 -*-
"""
Output helpers: reproducible CSV/JSON writing and human-readable formatting
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

CSV_ENCODING = "utf-8"


def format_float(value: float | int | None) -> str:
    """17 significant digits, so every float64 round-trips; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def format_cell(value: Any) -> str:
    if value is None or isinstance(value, (float, int)) and not isinstance(value, bool):
        return format_float(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write a header row and data rows with LF line endings. Returns the number of data rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding=CSV_ENCODING, newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
            count += 1
    return count


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(path: Path, payload: Any) -> None:
    """Strict JSON: NaN and infinities are written as null."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_json_safe(payload), indent=2, ensure_ascii=False, allow_nan=False)
    path.write_text(text + "\n", encoding=CSV_ENCODING, newline="\n")


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding=CSV_ENCODING))


def format_duration(seconds: float) -> str:
    """Format a wall-clock duration to a short human-readable string"""
    if seconds >= 3600:
        return f"{seconds / 3600:.2f} h"
    elif seconds >= 60:
        return f"{seconds / 60:.2f} min"
    elif seconds >= 1:
        return f"{seconds:.2f} s"
    else:
        return f"{seconds * 1000:.0f} ms"
