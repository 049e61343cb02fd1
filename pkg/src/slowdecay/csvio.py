"""CSV persistence: '#'-prefixed key=value metadata, header, 17-digit floats."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .energies import CSV_COLUMNS, EnergySample


def format_float(x: float) -> str:
    """Serialize with 17 significant digits (lossless float round-trip)."""
    return format(float(x), ".17g")


def write_columns(
    path: str | Path,
    metadata: dict[str, str],
    columns: dict[str, list | np.ndarray],
) -> None:
    names = list(columns)
    length = len(columns[names[0]])
    lines = [f"# {k}={v}" for k, v in metadata.items()]
    lines.append(",".join(names))
    for i in range(length):
        row = []
        for name in names:
            cell = columns[name][i]
            row.append(cell if isinstance(cell, str) else format_float(cell))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def write_run_csv(
    path: str | Path, metadata: dict[str, str], series: list[EnergySample]
) -> None:
    columns = {
        name: [getattr(s, name) for s in series] for name in CSV_COLUMNS
    }
    write_columns(path, metadata, columns)


def read_csv(path: str | Path):
    """Read (metadata, columns); numeric columns become float arrays.

    Columns with any non-numeric cell are kept as lists of strings.
    """
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
        raise ValueError(f"{path}: no header line found")
    columns: dict[str, object] = {}
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(c) for c in cells])
        except ValueError:
            columns[name] = cells
    return metadata, columns
