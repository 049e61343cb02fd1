"""Reader for the simulator's CSV interface.

Files carry '#'-prefixed key=value metadata lines above a comma-separated
header; cells are decimal floats with 'nan' for undefined entries.  This
package talks to the simulator only through these files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PlotDataError(ValueError):
    pass


def read_csv(path: str | Path):
    """Return (metadata, columns); non-numeric columns stay lists of strings."""
    metadata: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            key, _, val = body.partition("=")
            if key:
                metadata[key.strip()] = val.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            continue
        rows.append([c.strip() for c in line.split(",")])
    if header is None:
        raise PlotDataError(f"{path}: no header line found")
    columns: dict[str, object] = {}
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(c) for c in cells])
        except ValueError:
            columns[name] = cells
    return metadata, columns


def require_columns(columns: dict, names: tuple[str, ...], path) -> None:
    missing = [n for n in names if n not in columns]
    if missing:
        raise PlotDataError(f"{path}: missing columns {missing}")


def finite_positive(t: np.ndarray, v: np.ndarray):
    keep = np.isfinite(t) & np.isfinite(v) & (v > 0)
    return t[keep], v[keep]
