"""
Periodic piecewise-linear time series used for prescribed inflows and
intramyocardial pressures
"""
import math
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class TimeSeries(BaseModel):
    """
    Samples of a periodic signal over exactly one period. The period is the last
    sample time; evaluation outside [0, T] wraps modulo T.
    """
    model_config = ConfigDict(frozen=True)

    times: Tuple[float, ...] = Field(..., description="Sample times in s, first = 0, strictly increasing")
    values: Tuple[float, ...] = Field(..., description="Sample values (unit depends on the quantity)")

    @model_validator(mode="after")
    def _check_samples(self) -> "TimeSeries":
        if len(self.times) < 2:
            raise ValueError("a time series needs at least 2 samples")
        if len(self.times) != len(self.values):
            raise ValueError(
                f"times and values differ in length ({len(self.times)} != {len(self.values)})"
            )
        if self.times[0] != 0.0:
            raise ValueError(f"first sample time must be 0, got {self.times[0]}")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("sample times must be strictly increasing")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("sample values must be finite")
        return self

    @property
    def period(self) -> float:
        return self.times[-1]

    @classmethod
    def constant(cls, value: float, period: float = 1.0) -> "TimeSeries":
        return cls(times=(0.0, period), values=(value, value))

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[float]) -> "TimeSeries":
        return cls(times=tuple(float(t) for t in times), values=tuple(float(v) for v in values))


def wrap_time(t: float, period: float) -> float:
    """
    Map t into [0, T]. Times inside the period are returned unchanged and every
    positive multiple of T maps to T, so cycle ends all see the last sample.
    """
    if 0.0 <= t <= period:
        return t
    tau = t % period
    if tau == 0.0 and t > 0.0:
        return period
    return tau


def periodic_interp(times: np.ndarray, values: np.ndarray, period: float, t: float) -> float:
    return float(np.interp(wrap_time(t, period), times, values))


def periodic_slope(times: np.ndarray, values: np.ndarray, period: float, t: float) -> float:
    tau = wrap_time(t, period)
    i = int(np.searchsorted(times, tau, side="right")) - 1
    i = min(max(i, 0), len(times) - 2)
    return float((values[i + 1] - values[i]) / (times[i + 1] - times[i]))


def interpolate_timeseries(ts: TimeSeries, t: float) -> float:
    """
    Evaluate the series at time t

    Args:
        ts: Periodic series
        t: Time in s, any real value

    Returns:
        Piecewise-linear interpolation of the samples at t wrapped into the period
    """
    return periodic_interp(np.asarray(ts.times), np.asarray(ts.values), ts.period, t)


def timeseries_derivative(ts: TimeSeries, t: float) -> float:
    """Slope of the interpolant at t (right-sided at sample times, left-sided at cycle ends)"""
    return periodic_slope(np.asarray(ts.times), np.asarray(ts.values), ts.period, t)


def timeseries_mean(ts: TimeSeries) -> float:
    """Cycle average of the interpolant"""
    times = np.asarray(ts.times)
    values = np.asarray(ts.values)
    area = np.sum(0.5 * (values[1:] + values[:-1]) * np.diff(times))
    return float(area / ts.period)
