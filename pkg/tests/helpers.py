"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from blocktrack import (
    FIXED360,
    GREGORIAN,
    DailyFieldSeries,
    Date,
    LatLonGrid,
    date_range,
)


def make_grid(n_lat: int = 4, n_lon: int = 5, lat_top: float = 65.0,
              lat_step: float = -5.0, lon_start: float = 0.0,
              lon_step: float = 5.0) -> LatLonGrid:
    lats = lat_top + lat_step * np.arange(n_lat)
    lons = lon_start + lon_step * np.arange(n_lon)
    return LatLonGrid(lat_centers=lats, lon_centers=lons)


def make_series(grid: LatLonGrid, dates, values=None, calendar=GREGORIAN,
                **kwargs) -> DailyFieldSeries:
    dates = tuple(dates)
    if values is None:
        values = np.zeros((len(dates), grid.n_lat, grid.n_lon))
    return DailyFieldSeries(
        grid=grid, calendar=calendar, dates=dates, values=values, **kwargs
    )


def full_years(start_year: int, n_years: int, calendar=GREGORIAN) -> list[Date]:
    end_month, end_day = (12, 31) if calendar == GREGORIAN else (12, 30)
    return date_range(
        calendar,
        Date(start_year, 1, 1),
        Date(start_year + n_years - 1, end_month, end_day),
    )


def summer_dates(years, month_from: int = 6, month_to: int = 8,
                 calendar=GREGORIAN) -> list[Date]:
    last_day = 31 if calendar == GREGORIAN else 30
    out = []
    for y in years:
        out += date_range(calendar, Date(y, month_from, 1), Date(y, month_to, last_day))
    return out


def full_year_series(grid: LatLonGrid, start_year: int = 2000,
                     n_years: int = 2, noise: float = 0.0, seed: int = 0,
                     calendar=GREGORIAN) -> DailyFieldSeries:
    """Raw-height series with a smooth annual cycle, suitable for
    climatology building."""
    dates = full_years(start_year, n_years, calendar)
    doy = np.array([calendar.day_of_year(d) for d in dates], dtype=np.float64)
    base = 5500.0 + 80.0 * np.cos(2 * np.pi * (doy - 15) / calendar.cycle_length)
    values = np.repeat(
        base[:, None, None], grid.n_lat * grid.n_lon, axis=1
    ).reshape(len(dates), grid.n_lat, grid.n_lon)
    if noise:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise, size=values.shape)
    return make_series(grid, dates, values, calendar=calendar)


def planted_tuning_series(n_years: int = 10, start_year: int = 2000) -> DailyFieldSeries:
    """Normalized series with a planted optimum at level 1.3, overlap 20.

    Per year, on a 30 x 40 one-degree grid with rows from 75N down:

    * a 7-day feature at 1.35 whose day-3-to-4 link weighs ~20.30,
      so it tracks at an overlap cutoff of 20 but not 21,
    * a 5-day drifting feature at 1.35 whose links weigh ~19.90,
      creating false episodes at cutoffs of 19 and below,
    * a 6-day stationary feature at 1.25 with ~48.0 self-overlap,
      creating false episodes whenever the level drops to 1.2.

    Labeling the series with detect(level=1.3, min_overlap=20) therefore
    scores strictly best at exactly that parameter pair.
    """
    grid = make_grid(30, 40, lat_top=75.0, lat_step=-1.0, lon_start=0.0,
                     lon_step=1.0)
    season = []
    for year in range(start_year, start_year + n_years):
        season += date_range(GREGORIAN, Date(year, 6, 1), Date(year, 7, 10))
    values = np.zeros((len(season), 30, 40))
    days_per_year = 40
    for y in range(n_years):
        base = y * days_per_year
        for i in range(9, 16):  # June 10-16
            cols = slice(0, 28) if i <= 11 else slice(8, 36)
            values[base + i, 15:17, cols] = 1.35
        for step, i in enumerate(range(19, 24)):  # June 20-24
            values[base + i, 9:11, 3 * step:3 * step + 27] = 1.35
        for i in range(27, 33):  # June 28 - July 3
            values[base + i, 22:25, 5:31] = 1.25
    return make_series(grid, season, values, variable="z500_norm", units="")


__all__ = [
    "FIXED360",
    "GREGORIAN",
    "full_year_series",
    "full_years",
    "make_grid",
    "make_series",
    "planted_tuning_series",
    "summer_dates",
]
