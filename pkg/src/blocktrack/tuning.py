"""Cross-validated grid search over detection threshold and overlap.

The detector has no trained state, so a "fold" only scopes the scoring:
detection runs once per parameter pair on the whole tuning set, and each
fold's score is the metric restricted to that fold's years. The tuning
set is the chronologically first half of the years (rounded up), split
into contiguous year blocks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .calendars import Date
from .detection import (
    TrajectoryGraph,
    extract_all_components,
    label_blocking,
    weighted_overlap,
)
from .errors import AlignmentError, InvalidArgumentError
from .evaluation import EvalReport
from .grid import DailyFieldSeries
from .util import parallel_map

OBJECTIVES = ("f1", "balance")


@dataclass(frozen=True)
class TuneRow:
    level: float
    min_overlap: float
    mean_score: float
    fold_scores: tuple[float, ...]


@dataclass(frozen=True)
class TuneResult:
    best_level: float
    best_min_overlap: float
    objective: str
    rows: tuple[TuneRow, ...]
    fold_years: tuple[tuple[int, ...], ...]

    @property
    def fold_assignment(self) -> dict[int, int]:
        return {year: i for i, years in enumerate(self.fold_years) for year in years}

    def row(self, level: float, min_overlap: float) -> TuneRow:
        for r in self.rows:
            if r.level == level and r.min_overlap == min_overlap:
                return r
        raise KeyError((level, min_overlap))

    @property
    def best_score(self) -> float:
        return self.row(self.best_level, self.best_min_overlap).mean_score


def tuning_years(series: DailyFieldSeries) -> tuple[int, ...]:
    """Chronologically first half of the series' years, rounded up."""
    years = sorted({d.year for d in series.dates})
    return tuple(years[: math.ceil(len(years) / 2)])


def _subset_by_years(series: DailyFieldSeries, years) -> DailyFieldSeries:
    wanted = set(years)
    keep = [i for i, d in enumerate(series.dates) if d.year in wanted]
    return DailyFieldSeries(
        grid=series.grid,
        calendar=series.calendar,
        dates=tuple(series.dates[i] for i in keep),
        values=series.values[keep],
        variable=series.variable,
        units=series.units,
    )


def _fold_score(labels: dict[Date, bool], truth: dict[Date, bool],
                years: set[int], objective: str) -> float:
    tp = tn = fp = fn = 0
    for date, p in labels.items():
        if date.year not in years:
            continue
        t = truth[date]
        if p and t:
            tp += 1
        elif not p and not t:
            tn += 1
        elif p:
            fp += 1
        else:
            fn += 1
    report = EvalReport.from_counts(tp, tn, fp, fn)
    if objective == "f1":
        return report.f1
    return -abs(report.precision - report.recall)


def tune(series: DailyFieldSeries, truth, level_grid, overlap_grid,
         n_folds: int = 5, *, min_days: int = 5, connectivity: int = 4,
         objective: str = "f1", threads: int = 1) -> TuneResult:
    """Grid search maximizing the mean per-fold score.

    ``truth`` maps every tuning-set date to a boolean. Ties on the mean
    score go to the smaller threshold, then the smaller overlap.
    """
    levels = [float(x) for x in level_grid]
    overlaps = [float(x) for x in overlap_grid]
    if not levels or not overlaps:
        raise InvalidArgumentError("parameter grids must be non-empty")
    if objective not in OBJECTIVES:
        raise InvalidArgumentError(f"objective must be one of {OBJECTIVES}")
    if n_folds < 1:
        raise InvalidArgumentError(f"n_folds must be >= 1, got {n_folds}")

    years = tuning_years(series)
    if n_folds > len(years):
        raise InvalidArgumentError(
            f"{n_folds} folds but only {len(years)} tuning years"
        )
    sub = _subset_by_years(series, years)
    truth_map = {d: bool(v) for d, v in dict(truth).items()}
    for date in sub.dates:
        if date not in truth_map:
            raise AlignmentError(f"no truth label for {date.isoformat()}")
    folds = tuple(
        tuple(int(y) for y in chunk)
        for chunk in np.array_split(np.array(years), n_folds)
    )
    fold_sets = [set(f) for f in folds]

    def eval_level(level: float) -> list[TuneRow]:
        # components and positive-overlap candidate edges depend only on
        # the threshold; each overlap cutoff just filters the candidates
        comps = extract_all_components(sub, level, connectivity)
        nodes = [c for cs in comps.values() for c in cs]
        candidates = []
        dates = sorted(comps)
        for day, nxt in zip(dates, dates[1:]):
            if not sub.calendar.consecutive(day, nxt):
                continue
            for a in comps[day]:
                for b in comps[nxt]:
                    w = weighted_overlap(a, b)
                    if w > 0.0:
                        candidates.append((a.key, b.key, w))
        rows = []
        for cutoff in overlaps:
            edges = [e for e in candidates if e[2] >= cutoff]
            graph = TrajectoryGraph(nodes, edges, sub.calendar, min_overlap=cutoff)
            labels = label_blocking(graph, min_days, dates=sub.dates).as_dict()
            scores = tuple(
                _fold_score(labels, truth_map, fs, objective) for fs in fold_sets
            )
            rows.append(
                TuneRow(
                    level=level,
                    min_overlap=cutoff,
                    mean_score=float(np.mean(scores)),
                    fold_scores=scores,
                )
            )
        return rows

    per_level = parallel_map(eval_level, levels, threads)
    rows = tuple(row for level_rows in per_level for row in level_rows)
    best = min(rows, key=lambda r: (-r.mean_score, r.level, r.min_overlap))
    return TuneResult(
        best_level=best.level,
        best_min_overlap=best.min_overlap,
        objective=objective,
        rows=rows,
        fold_years=folds,
    )


def write_surface_csv(result: TuneResult, path) -> None:
    """Full score surface, one row per parameter pair."""
    n_folds = len(result.fold_years)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["level", "min_overlap", "mean_score"]
            + [f"fold_{i}" for i in range(n_folds)]
        )
        for r in result.rows:
            writer.writerow(
                [f"{r.level:g}", f"{r.min_overlap:g}", f"{r.mean_score:.6f}"]
                + [f"{s:.6f}" for s in r.fold_scores]
            )
