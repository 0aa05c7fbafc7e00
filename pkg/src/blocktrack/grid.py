"""Grids, daily field stacks, domain cropping and regridding.

A :class:`LatLonGrid` is a rectangle of cell centers on a latitude and
longitude axis, each strictly monotone (either direction). Cell
membership in a cropped domain is decided by the cell center. A
:class:`DailyFieldSeries` stacks one 2D field per date on a shared grid
and calendar; instances are immutable and safe to share across threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .calendars import Calendar, Date
from .errors import EmptyDomainError, InvalidArgumentError, ShapeError


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


def _strictly_monotone(x: np.ndarray) -> bool:
    if x.size < 2:
        return True
    d = np.diff(x)
    return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class LatLonGrid:
    """Cell-center coordinates of a regular latitude/longitude grid.

    Parameters
    ----------
    lat_centers : array of degrees north, one per row, strictly monotone
    lon_centers : array of degrees east, one per column, strictly monotone
    """

    lat_centers: np.ndarray
    lon_centers: np.ndarray

    def __post_init__(self) -> None:
        lat = _readonly(np.atleast_1d(self.lat_centers))
        lon = _readonly(np.atleast_1d(self.lon_centers))
        if lat.ndim != 1 or lon.ndim != 1:
            raise ShapeError("grid axes must be one-dimensional")
        if lat.size < 1 or lon.size < 1:
            raise ShapeError("grid axes must be non-empty")
        if np.any(np.abs(lat) > 90.0):
            raise InvalidArgumentError("latitudes must lie in [-90, 90]")
        if not np.all(np.isfinite(lat)) or not np.all(np.isfinite(lon)):
            raise InvalidArgumentError("grid coordinates must be finite")
        if not _strictly_monotone(lat) or not _strictly_monotone(lon):
            raise InvalidArgumentError("grid axes must be strictly monotone")
        object.__setattr__(self, "lat_centers", lat)
        object.__setattr__(self, "lon_centers", lon)

    @property
    def n_lat(self) -> int:
        return int(self.lat_centers.size)

    @property
    def n_lon(self) -> int:
        return int(self.lon_centers.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_lat, self.n_lon)

    def row_weights(self) -> np.ndarray:
        """cos(latitude) per row; the area weight used throughout."""
        return latitude_weight(self.lat_centers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatLonGrid):
            return NotImplemented
        return np.array_equal(self.lat_centers, other.lat_centers) and np.array_equal(
            self.lon_centers, other.lon_centers
        )

    def __hash__(self) -> int:
        return hash((self.lat_centers.tobytes(), self.lon_centers.tobytes()))


@dataclass(frozen=True)
class DailyFieldSeries:
    """A time-ordered stack of 2D fields on one grid and calendar.

    ``values`` has shape (n_dates, n_lat, n_lon), is finite everywhere
    and is frozen read-only on construction. Dates must be strictly
    increasing and valid under ``calendar``; gaps are allowed (seasonal
    windows produce them every year boundary).
    """

    grid: LatLonGrid
    calendar: Calendar
    dates: tuple[Date, ...]
    values: np.ndarray
    variable: str = "z500"
    units: str = "m"

    def __post_init__(self) -> None:
        dates = tuple(self.dates)
        vals = _readonly(self.values)
        if vals.ndim != 3:
            raise ShapeError(f"values must be 3D, got shape {vals.shape}")
        if vals.shape != (len(dates), self.grid.n_lat, self.grid.n_lon):
            raise ShapeError(
                f"values shape {vals.shape} does not match "
                f"{len(dates)} dates on a {self.grid.shape} grid"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidArgumentError("field values must be finite")
        for d in dates:
            self.calendar.validate(d)
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise InvalidArgumentError("dates must be strictly increasing")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", vals)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def with_values(self, values: np.ndarray, variable: str | None = None,
                    units: str | None = None) -> "DailyFieldSeries":
        """Same axes, new data. Used by every pipeline stage."""
        return DailyFieldSeries(
            grid=self.grid,
            calendar=self.calendar,
            dates=self.dates,
            values=values,
            variable=self.variable if variable is None else variable,
            units=self.units if units is None else units,
        )

    def index_of(self, date: Date) -> int:
        try:
            return self.dates.index(date)
        except ValueError:
            raise KeyError(f"date {date.isoformat()} not in series") from None


def latitude_weight(lat):
    """Area weight ``cos(lat)`` for latitude in degrees.

    Accepts scalars or arrays; raises for |lat| > 90.
    """
    arr = np.asarray(lat, dtype=np.float64)
    if np.any(np.abs(arr) > 90.0):
        raise InvalidArgumentError("latitude outside [-90, 90]")
    w = np.cos(np.radians(arr))
    return float(w) if np.isscalar(lat) or arr.ndim == 0 else w


def block_average(series: DailyFieldSeries, factor_lat: int, factor_lon: int) -> DailyFieldSeries:
    """Downsample by averaging non-overlapping blocks of cells.

    Blocks are aligned to the grid origin (row 0, col 0). Trailing rows
    or columns that do not fill a block are dropped with a warning.
    Output coordinates are the mean of each block's centers.
    """
    if int(factor_lat) != factor_lat or int(factor_lon) != factor_lon:
        raise InvalidArgumentError("block factors must be integers")
    fa, fo = int(factor_lat), int(factor_lon)
    if fa < 1 or fo < 1:
        raise InvalidArgumentError(f"block factors must be >= 1, got ({fa}, {fo})")
    n_lat, n_lon = series.grid.shape
    keep_lat = (n_lat // fa) * fa
    keep_lon = (n_lon // fo) * fo
    if keep_lat == 0 or keep_lon == 0:
        raise InvalidArgumentError(
            f"factors ({fa}, {fo}) exceed grid shape {series.grid.shape}"
        )
    if keep_lat != n_lat or keep_lon != n_lon:
        warnings.warn(
            f"block_average dropping {n_lat - keep_lat} trailing row(s) and "
            f"{n_lon - keep_lon} trailing column(s) not filling a block",
            stacklevel=2,
        )
    vals = series.values[:, :keep_lat, :keep_lon]
    t = vals.shape[0]
    blocked = vals.reshape(t, keep_lat // fa, fa, keep_lon // fo, fo)
    out = blocked.mean(axis=(2, 4))
    lat = series.grid.lat_centers[:keep_lat].reshape(-1, fa).mean(axis=1)
    lon = series.grid.lon_centers[:keep_lon].reshape(-1, fo).mean(axis=1)
    return DailyFieldSeries(
        grid=LatLonGrid(lat, lon),
        calendar=series.calendar,
        dates=series.dates,
        values=out,
        variable=series.variable,
        units=series.units,
    )


def crop_domain(series: DailyFieldSeries, lat_min: float, lat_max: float,
                lon_min: float, lon_max: float) -> DailyFieldSeries:
    """Restrict to cells whose centers fall inside the closed window.

    Axis ordering is preserved; an empty selection raises
    :class:`EmptyDomainError`.
    """
    if lat_min > lat_max or lon_min > lon_max:
        raise InvalidArgumentError("crop window bounds are inverted")
    lat = series.grid.lat_centers
    lon = series.grid.lon_centers
    lat_mask = (lat >= lat_min) & (lat <= lat_max)
    lon_mask = (lon >= lon_min) & (lon <= lon_max)
    if not lat_mask.any() or not lon_mask.any():
        raise EmptyDomainError(
            f"crop window ({lat_min}, {lat_max}, {lon_min}, {lon_max}) "
            "contains no cell centers"
        )
    vals = series.values[:, lat_mask, :][:, :, lon_mask]
    return DailyFieldSeries(
        grid=LatLonGrid(lat[lat_mask], lon[lon_mask]),
        calendar=series.calendar,
        dates=series.dates,
        values=vals,
        variable=series.variable,
        units=series.units,
    )
