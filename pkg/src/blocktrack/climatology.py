"""Seasonal-cycle statistics and anomaly normalization.

The preprocessing chain turns a raw height series into a dimensionless
standardized anomaly field:

1. per-calendar-day mean and standard deviation across years,
2. harmonic smoothing of both cycles (mean plus the first six Fourier
   harmonics by default),
3. anomaly = raw minus smoothed daily mean,
4. linear detrend of the pooled anomaly series per cell,
5. division by ``max(floor, smoothed daily std)`` with a 100 m floor.

Statistics use only the raw field; the floor keeps quiet regions and
seasons from producing inflated ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calendars import Date, Gregorian365
from .errors import InsufficientDataError, InvalidArgumentError, ShapeError
from .grid import DailyFieldSeries, LatLonGrid


@dataclass(frozen=True)
class SeasonalCycle:
    """Per-cell daily climatology arrays of shape (cycle_length, n_lat, n_lon).

    ``raw_mean`` and ``raw_std`` are filled by :func:`long_term_daily_mean`;
    the smoothed variants by :func:`smooth_cycle`. Slots for days of year
    never observed hold NaN and cannot be smoothed.
    """

    grid: LatLonGrid
    cycle_length: int
    raw_mean: np.ndarray
    raw_std: np.ndarray
    smoothed_mean: np.ndarray | None = None
    smoothed_std: np.ndarray | None = None

    def __post_init__(self) -> None:
        expected = (self.cycle_length, self.grid.n_lat, self.grid.n_lon)
        for name in ("raw_mean", "raw_std", "smoothed_mean", "smoothed_std"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != expected:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {expected}")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        with np.errstate(invalid="ignore"):
            if np.any(self.raw_std < 0):
                raise InvalidArgumentError("raw_std must be non-negative")

    def require_smoothed(self) -> None:
        if self.smoothed_mean is None or self.smoothed_std is None:
            raise InvalidArgumentError(
                "seasonal cycle has no smoothed arrays; run smooth_cycle first"
            )


def long_term_daily_mean(series: DailyFieldSeries) -> SeasonalCycle:
    """Mean and population std per calendar day across years.

    Requires at least two distinct years. Gregorian Feb 29 values are
    excluded from accumulation; the date later reads the Feb 28 slot.
    Days of year absent from the series are left NaN.
    """
    years = {d.year for d in series.dates}
    if len(years) < 2:
        raise InsufficientDataError(
            f"need at least 2 years for a daily climatology, got {len(years)}"
        )
    length = series.calendar.cycle_length
    n_lat, n_lon = series.grid.shape
    total = np.zeros((length, n_lat, n_lon))
    total_sq = np.zeros((length, n_lat, n_lon))
    count = np.zeros(length, dtype=np.int64)
    leap_fold = isinstance(series.calendar, Gregorian365)
    for i, date in enumerate(series.dates):
        if leap_fold and date.month == 2 and date.day == 29:
            continue
        doy = series.calendar.day_of_year(date)
        v = series.values[i]
        total[doy] += v
        total_sq[doy] += v * v
        count[doy] += 1
    mean = np.full_like(total, np.nan)
    var = np.full_like(total, np.nan)
    seen = count > 0
    cnt = count[seen, None, None].astype(np.float64)
    mean[seen] = total[seen] / cnt
    # population variance; clip tiny negative rounding residue
    var[seen] = np.maximum(total_sq[seen] / cnt - mean[seen] ** 2, 0.0)
    return SeasonalCycle(
        grid=series.grid,
        cycle_length=length,
        raw_mean=mean,
        raw_std=np.sqrt(var),
    )


def fourier_smooth(cycle_values: np.ndarray, n_harmonics: int = 6) -> np.ndarray:
    """Truncated Fourier reconstruction along the leading axis.

    Keeps the mean term plus harmonics ``1..n_harmonics`` of the discrete
    Fourier series and zeroes the rest. The length L of the leading axis
    is the cycle length; ``n_harmonics`` must be < L/2.
    """
    arr = np.asarray(cycle_values, dtype=np.float64)
    length = arr.shape[0]
    if length < 2:
        raise InvalidArgumentError("cycle must have at least 2 samples")
    if n_harmonics < 0:
        raise InvalidArgumentError("n_harmonics must be non-negative")
    if n_harmonics >= length / 2:
        raise InvalidArgumentError(
            f"n_harmonics={n_harmonics} too large for cycle length {length}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("cycle values must be finite")
    spec = np.fft.rfft(arr, axis=0)
    spec[n_harmonics + 1:] = 0.0
    return np.fft.irfft(spec, n=length, axis=0)


def smooth_cycle(cycle: SeasonalCycle, n_harmonics: int = 6) -> SeasonalCycle:
    """Fill the smoothed mean/std arrays of a climatology.

    Every day-of-year slot must be populated; a seasonal cycle with gaps
    cannot be projected onto harmonics.
    """
    if np.isnan(cycle.raw_mean).any():
        raise InsufficientDataError(
            "seasonal cycle has unobserved days of year; harmonic smoothing "
            "needs full-year coverage"
        )
    return SeasonalCycle(
        grid=cycle.grid,
        cycle_length=cycle.cycle_length,
        raw_mean=cycle.raw_mean,
        raw_std=cycle.raw_std,
        smoothed_mean=fourier_smooth(cycle.raw_mean, n_harmonics),
        smoothed_std=fourier_smooth(cycle.raw_std, n_harmonics),
    )


def build_seasonal_cycle(series: DailyFieldSeries, n_harmonics: int = 6) -> SeasonalCycle:
    """Convenience: daily statistics plus harmonic smoothing in one call."""
    return smooth_cycle(long_term_daily_mean(series), n_harmonics)


def _check_cycle_match(series: DailyFieldSeries, cycle: SeasonalCycle) -> None:
    if cycle.grid != series.grid:
        raise ShapeError("series and seasonal cycle are on different grids")
    if cycle.cycle_length != series.calendar.cycle_length:
        raise ShapeError(
            f"cycle length {cycle.cycle_length} does not match calendar "
            f"{series.calendar.name}"
        )


def anomaly(series: DailyFieldSeries, cycle: SeasonalCycle) -> DailyFieldSeries:
    """Subtract the smoothed daily-mean cycle from each date's field."""
    _check_cycle_match(series, cycle)
    cycle.require_smoothed()
    idx = np.array([series.calendar.day_of_year(d) for d in series.dates])
    out = series.values - cycle.smoothed_mean[idx]
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError("anomaly hit an unobserved day of year")
    return series.with_values(out)


def detrend_linear(series: DailyFieldSeries) -> DailyFieldSeries:
    """Remove the per-cell least-squares line over the pooled series.

    The full fitted line (slope and intercept) is subtracted, so the
    output has zero OLS slope and zero mean per cell. The fit is against
    the time-step index, pooled over all days.
    """
    t = series.n_dates
    if t < 2:
        raise InsufficientDataError("detrending needs at least 2 time steps")
    x = np.arange(t, dtype=np.float64)
    xc = x - x.mean()
    denom = float(xc @ xc)
    flat = series.values.reshape(t, -1)
    mean = flat.mean(axis=0)
    slope = (xc @ flat) / denom
    fitted = mean[None, :] + np.outer(xc, slope)
    out = (flat - fitted).reshape(series.values.shape)
    return series.with_values(out)


def normalize(series: DailyFieldSeries, cycle: SeasonalCycle,
              floor: float = 100.0) -> DailyFieldSeries:
    """Divide anomalies by ``max(floor, smoothed daily std)`` per cell.

    The result is dimensionless; with the default 100 m floor, values of
    1.0 and above mark departures unusual for the location and season.
    """
    if floor < 0:
        raise InvalidArgumentError(f"floor must be non-negative, got {floor}")
    _check_cycle_match(series, cycle)
    cycle.require_smoothed()
    idx = np.array([series.calendar.day_of_year(d) for d in series.dates])
    divisor = np.maximum(float(floor), cycle.smoothed_std[idx])
    with np.errstate(divide="ignore", invalid="ignore"):
        out = series.values / divisor
    if not np.all(np.isfinite(out)):
        raise InvalidArgumentError(
            "normalization produced non-finite values (zero divisor or "
            "unobserved day of year)"
        )
    return series.with_values(out, units="")
