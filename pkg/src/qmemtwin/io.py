"""CSV/JSON emission of experiment rows and run manifests.

Floats are written with ``repr`` (shortest round-trip decimal) so output is
byte-stable and re-parses to the same values.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

FORMATS = ("csv", "json")


def _cell(value):
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _columns(rows: Sequence[dict]) -> list:
    cols = []
    for row in rows:
        for key in row:
            if key not in cols:
                cols.append(key)
    return cols


def to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    columns = list(columns) if columns is not None else _columns(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    columns = list(columns) if columns is not None else _columns(rows)
    data = [{c: row[c] for c in columns if c in row} for row in rows]
    # infinite SNR is written as the non-standard token Infinity, which json.loads accepts
    return json.dumps(data, indent=1) + "\n"


def render(rows: Sequence[dict], fmt: str, columns: Sequence[str] | None = None) -> str:
    if fmt == "csv":
        return to_csv(rows, columns)
    if fmt == "json":
        return to_json(rows, columns)
    raise ValueError(f"unknown format {fmt!r}")


def parse_csv(text: str) -> list:
    """Read rows back, converting numeric and boolean cells."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for key, cell in row.items():
            if cell == "":
                parsed[key] = None
            elif cell in ("true", "false"):
                parsed[key] = cell == "true"
            else:
                try:
                    parsed[key] = int(cell) if cell.lstrip("-").isdigit() else float(cell)
                except ValueError:
                    parsed[key] = cell
        out.append(parsed)
    return out


def manifest_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def write_output(text: str, out: str | Path, manifest: dict) -> Path:
    """Write the data file and its manifest next to it; returns the manifest path."""
    out = Path(out)
    out.write_text(text)
    mpath = manifest_path(out)
    mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return mpath
