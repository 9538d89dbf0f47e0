"""Flat-file outputs: CSV series data and JSON run manifests.

The CSV contract: header ``t_s,<label1>,<label2>,...``, one row per grid
point, every value printed with 17 significant digits so parsing the file
reproduces the binary doubles exactly. The companion manifest carries the
resolved scenario, regime report, simulation stats, and comparison metrics;
its only non-deterministic content lives under the "runtime" key.
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError, InvalidParameterError
from .timeseries import TimeSeries

__all__ = ["emit_csv", "read_csv", "write_manifest", "snapshot_csv", "ensure_outdir"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def emit_csv(path, series_list) -> None:
    """Write series sharing one time grid as columns next to ``t_s``."""
    if not series_list:
        raise InvalidParameterError("no series to write")
    base = series_list[0]
    for s in series_list[1:]:
        if len(s) != len(base) or not np.array_equal(s.t, base.t):
            raise InvalidParameterError(
                f"series {s.label!r} is on a different grid than {base.label!r}"
            )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t_s," + ",".join(s.label for s in series_list) + "\n")
            for i in range(len(base)):
                row = [_fmt(base.t[i])] + [_fmt(s.values[i]) for s in series_list]
                fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise ConfigError(f"cannot write CSV {path!r}: {exc}") from exc


def read_csv(path) -> list[TimeSeries]:
    """Parse a CSV written by :func:`emit_csv` back into series."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split(",")
            rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read CSV {path!r}: {exc}") from exc
    if not header or header[0] != "t_s":
        raise ConfigError(f"{path!r} is not a series CSV (first column must be t_s)")
    data = np.array(rows, dtype=float)
    t = data[:, 0]
    return [TimeSeries(label, t, data[:, j + 1]) for j, label in enumerate(header[1:])]


def write_manifest(path, manifest: dict) -> None:
    """Write the manifest as stable, sorted JSON with a trailing newline."""
    stamped = dict(manifest)
    stamped.setdefault("runtime", {})
    stamped["runtime"] = {
        "created": datetime.now(timezone.utc).isoformat(),
        **stamped["runtime"],
    }
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(stamped, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise ConfigError(f"cannot write manifest {path!r}: {exc}") from exc


def snapshot_csv(path, x, y, z) -> None:
    """Debug dump of final particle positions: particle_id, x, y, z."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("particle_id,x_m,y_m,z_m\n")
            for i in range(len(x)):
                fh.write(f"{i},{_fmt(x[i])},{_fmt(y[i])},{_fmt(z[i])}\n")
    except OSError as exc:
        raise ConfigError(f"cannot write snapshot {path!r}: {exc}") from exc


def ensure_outdir(path) -> str:
    """Create the output directory if needed; return it."""
    os.makedirs(path, exist_ok=True)
    return path
