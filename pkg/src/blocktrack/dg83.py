"""Baseline blocking index: fixed-sigma threshold with pixel linking.

The variant implemented here thresholds meter-space height anomalies at
``max(floor, multiplier * smoothed daily std)`` per cell and day of
year, links candidate regions across consecutive days when they share
at least one cell, and keeps episodes lasting five days or longer. The
historical latitude rescaling of anomalies by sin(45)/sin(lat) is
available behind a flag but off by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calendars import Date
from .climatology import SeasonalCycle, _check_cycle_match
from .detection import (
    BlockingLabels,
    Component,
    TrajectoryGraph,
    build_trajectory_graph,
    cell_overlap,
    extract_components,
    label_blocking,
)
from .errors import AlignmentError, InvalidArgumentError
from .grid import DailyFieldSeries
from .util import parallel_map

_SIN45 = np.sin(np.radians(45.0))


@dataclass(frozen=True)
class DG83Config:
    sigma_multiplier: float = 1.5
    floor: float = 100.0
    min_days: int = 5
    min_overlap_cells: int = 1
    connectivity: int = 4
    latitude_rescaling: bool = False

    def __post_init__(self) -> None:
        if self.sigma_multiplier <= 0 or self.floor <= 0:
            raise InvalidArgumentError("sigma_multiplier and floor must be positive")
        if self.min_days < 1 or self.min_overlap_cells < 1:
            raise InvalidArgumentError("min_days and min_overlap_cells must be >= 1")
        if self.connectivity not in (4, 8):
            raise InvalidArgumentError("connectivity must be 4 or 8")


def dg83_threshold(cycle: SeasonalCycle, cfg: DG83Config) -> np.ndarray:
    """Per-slot threshold field, shape (cycle_length, n_lat, n_lon)."""
    cycle.require_smoothed()
    return np.maximum(cfg.floor, cfg.sigma_multiplier * cycle.smoothed_std)


def dg83_detect(anomaly_series: DailyFieldSeries, cycle: SeasonalCycle,
                cfg: DG83Config = DG83Config(), threads: int = 1,
                ) -> tuple[BlockingLabels, TrajectoryGraph]:
    """Run the baseline on meter-space anomalies.

    Candidate cells satisfy ``anomaly >= max(floor, k * std)``. With
    ``latitude_rescaling`` the anomaly is first multiplied by
    sin(45)/sin(lat), which requires a strictly northern-hemisphere
    grid.
    """
    _check_cycle_match(anomaly_series, cycle)
    thresholds = dg83_threshold(cycle, cfg)
    values = anomaly_series.values
    if cfg.latitude_rescaling:
        lat = anomaly_series.grid.lat_centers
        if np.any(lat <= 0):
            raise InvalidArgumentError(
                "latitude rescaling needs strictly positive latitudes"
            )
        factor = _SIN45 / np.sin(np.radians(lat))
        values = values * factor[None, :, None]
    cal = anomaly_series.calendar
    doy = [cal.day_of_year(d) for d in anomaly_series.dates]

    def one(i: int) -> list[Component]:
        # exceedance-relative field: candidate cells are >= 0
        margin = values[i] - thresholds[doy[i]]
        return extract_components(
            margin, 0.0, anomaly_series.grid, anomaly_series.dates[i],
            cfg.connectivity,
        )

    comps = dict(zip(
        anomaly_series.dates,
        parallel_map(one, range(anomaly_series.n_dates), threads),
    ))
    graph = build_trajectory_graph(
        comps, float(cfg.min_overlap_cells), cal, overlap_fn=cell_overlap
    )
    labels = label_blocking(graph, cfg.min_days, dates=anomaly_series.dates)
    return labels, graph


@dataclass(frozen=True)
class DisagreementRow:
    """How two detectors split the credit on one truth class."""

    only_ours: int
    only_baseline: int
    both: int
    neither: int

    @property
    def total(self) -> int:
        return self.only_ours + self.only_baseline + self.both + self.neither


@dataclass(frozen=True)
class DisagreementCounts:
    blocked: DisagreementRow
    not_blocked: DisagreementRow


def _label_map(labels) -> dict[Date, bool]:
    if isinstance(labels, BlockingLabels):
        return labels.as_dict()
    return {d: bool(v) for d, v in dict(labels).items()}


def disagreement_table(ours, baseline,
                       truth: dict[Date, bool]) -> DisagreementCounts:
    """Cross-tabulate which method is correct, split by the truth label.

    Both label streams may be BlockingLabels or plain date->bool maps
    covering the same dates.
    """
    ours_map = _label_map(ours)
    base_map = _label_map(baseline)
    if set(ours_map) != set(base_map):
        raise AlignmentError("label streams cover different dates")
    missing = [d for d in sorted(ours_map) if d not in truth]
    if missing:
        raise AlignmentError(
            f"truth missing {len(missing)} dates, first {missing[0].isoformat()}"
        )
    counts = {True: [0, 0, 0, 0], False: [0, 0, 0, 0]}
    for date in sorted(ours_map):
        a, b = ours_map[date], base_map[date]
        t = bool(truth[date])
        a_ok = a == t
        b_ok = b == t
        if a_ok and not b_ok:
            counts[t][0] += 1
        elif b_ok and not a_ok:
            counts[t][1] += 1
        elif a_ok:
            counts[t][2] += 1
        else:
            counts[t][3] += 1
    return DisagreementCounts(
        blocked=DisagreementRow(*counts[True]),
        not_blocked=DisagreementRow(*counts[False]),
    )
