"""CSV writing with a provenance header and round-trippable float formatting."""

import csv
import io
import json
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def config_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def render_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence],
    config: dict,
    notes: Optional[dict] = None,
) -> str:
    """
    Header comment lines ('# config: {...}' then '# key: value' per note),
    the column row, then one formatted row per entry.
    """
    buffer = io.StringIO()
    buffer.write(config_line(config) + "\n")
    for key, value in (notes or {}).items():
        buffer.write(f"# {key}: {format_cell(value)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_csv(
    target: Union[str, Path, IO[str]],
    columns: Sequence[str],
    rows: Iterable[Sequence],
    config: dict,
    notes: Optional[dict] = None,
) -> None:
    text = render_csv(columns, rows, config, notes)
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)
