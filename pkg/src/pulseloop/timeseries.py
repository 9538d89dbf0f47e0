"""Sampled normalized received-signal traces and comparison metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = ["TimeSeries", "ComparisonMetrics", "compare_series"]


@dataclass(frozen=True)
class TimeSeries:
    """Normalized received concentration sampled on a strictly increasing grid.

    ``label`` records provenance ("analytical", "steady", "pbs", or a sweep
    cell label derived from one of those).
    """

    label: str
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.size != v.size:
            raise InvalidParameterError("time and value arrays must be 1D of equal length")
        if t.size == 0:
            raise InvalidParameterError("time series must contain at least one sample")
        if np.any(np.diff(t) <= 0.0):
            raise InvalidParameterError("time grid must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.t.size

    def window(self, t_min: float, t_max: float) -> "TimeSeries":
        """Sub-series restricted to t_min <= t <= t_max."""
        mask = (self.t >= t_min) & (self.t <= t_max)
        if not mask.any():
            raise InvalidParameterError(f"no samples in window [{t_min:g}, {t_max:g}] s")
        return TimeSeries(self.label, self.t[mask], self.values[mask])

    def relabel(self, label: str) -> "TimeSeries":
        return TimeSeries(label, self.t, self.values)

    @property
    def peak_time(self) -> float:
        """Grid time of the series maximum (the first pass peak for a CIR)."""
        return float(self.t[int(np.argmax(self.values))])


@dataclass(frozen=True)
class ComparisonMetrics:
    """Pointwise agreement summary between two series on a shared grid."""

    rmse: float
    max_abs_error: float
    peak_time_delta: float
    grid_points: int

    def as_dict(self) -> dict:
        return {
            "rmse": self.rmse,
            "max_abs_error": self.max_abs_error,
            "peak_time_delta_s": self.peak_time_delta,
            "grid_points": self.grid_points,
        }


def compare_series(a: TimeSeries, b: TimeSeries) -> ComparisonMetrics:
    """RMSE, max abs error, and peak-time offset of ``a`` relative to ``b``.

    The grids must match exactly; resampling is the caller's responsibility.
    """
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise InvalidParameterError(
            f"time grids differ ({len(a)} vs {len(b)} points); resample before comparing"
        )
    diff = a.values - b.values
    return ComparisonMetrics(
        rmse=float(np.sqrt(np.mean(diff * diff))),
        max_abs_error=float(np.max(np.abs(diff))),
        peak_time_delta=a.peak_time - b.peak_time,
        grid_points=len(a),
    )
