"""JSON report and CSV profile writers shared by the command-line workflows."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _plain(obj):
    """Convert numpy scalars/arrays and dataclass-ish values to plain JSON types."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_report(path: Path, command: str, config: dict, model_desc: dict, checks: list[dict]) -> dict:
    """Write the schema-versioned JSON report; returns the document."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": _plain(config),
        "model": _plain(model_desc),
        "checks": _plain(checks),
        "passed": all(c.get("passed", True) for c in checks),
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def write_profile_csv(path: Path, profile) -> None:
    """RadialProfile -> CSV with columns radius, value, w_label."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["radius", "value", "w_label"])
        writer.writeheader()
        for row in profile.to_rows():
            writer.writerow(row)


def write_plot_data(path: Path, header: list[str], rows) -> None:
    """Plot-data CSV; the header names the intended axes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def write_field_csv(path: Path, field) -> None:
    """Node table of a sampled field: coordinates then components."""
    grid = field.grid
    vals = field.values if field.values.ndim == 2 else field.values[:, None]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"x{i}" for i in range(grid.n)] + [f"c{i}" for i in range(vals.shape[1])]
        )
        for coord, val in zip(grid.coords, vals):
            writer.writerow([f"{c:.12g}" for c in coord] + [f"{v:.12g}" for v in val])


def load_report(path: Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
