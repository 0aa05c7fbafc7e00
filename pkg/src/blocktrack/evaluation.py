"""Scoring of label streams against truth and against each other.

Metrics follow the usual confusion-matrix definitions with an explicit
zero-denominator convention: precision, recall and F1 are 0 whenever
their denominator is 0. Date filters select which days are scored; the
default evaluation season is June through August.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .calendars import FIXED360, GREGORIAN, Calendar, Date, month_day_valid, parse_date
from .detection import BlockingLabels
from .errors import AlignmentError, InvalidArgumentError

JJA_MONTHS = frozenset({6, 7, 8})


class DateWindow:
    """A date filter built from a window string.

    Accepted forms:

    * ``all`` - every date
    * ``jja`` - June, July and August of any year
    * ``custom:START:END`` - closed absolute range of YYYY-MM-DD dates
    * ``mmdd:MM-DD:MM-DD`` - closed month-day range recurring every year
      (may wrap around the new year)
    """

    def __init__(self, spec: str):
        spec = spec.strip()
        self.spec = spec
        if spec == "all":
            self._test = lambda d: True
        elif spec == "jja":
            self._test = lambda d: d.month in JJA_MONTHS
        elif spec.startswith("custom:"):
            parts = spec.split(":")
            if len(parts) != 3:
                raise InvalidArgumentError(f"bad custom window {spec!r}")
            start, end = parse_date(parts[1]), parse_date(parts[2])
            if end < start:
                raise InvalidArgumentError(f"window end precedes start in {spec!r}")
            self._test = lambda d: start <= d <= end
        elif spec.startswith("mmdd:"):
            parts = spec.split(":")
            if len(parts) != 3:
                raise InvalidArgumentError(f"bad month-day window {spec!r}")
            lo = self._parse_md(parts[1])
            hi = self._parse_md(parts[2])
            if lo <= hi:
                self._test = lambda d: lo <= (d.month, d.day) <= hi
            else:  # wraps around the new year
                self._test = lambda d: (d.month, d.day) >= lo or (d.month, d.day) <= hi
        else:
            raise InvalidArgumentError(f"unknown window {spec!r}")

    @staticmethod
    def _parse_md(text: str) -> tuple[int, int]:
        try:
            month, day = text.split("-")
            pair = (int(month), int(day))
        except ValueError:
            raise InvalidArgumentError(f"bad month-day {text!r}") from None
        if not (1 <= pair[0] <= 12 and 1 <= pair[1] <= 31):
            raise InvalidArgumentError(f"month-day out of range: {text!r}")
        return pair

    def __contains__(self, date: Date) -> bool:
        return self._test(date)

    def __repr__(self) -> str:
        return f"DateWindow({self.spec!r})"


def _as_window(window) -> DateWindow:
    return window if isinstance(window, DateWindow) else DateWindow(str(window))


@dataclass(frozen=True)
class EvalReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    prevalence_pred: float
    prevalence_truth: float

    @classmethod
    def from_counts(cls, tp: int, tn: int, fp: int, fn: int) -> "EvalReport":
        total = tp + tn + fp + fn

        def ratio(num: float, den: float) -> float:
            return num / den if den > 0 else 0.0

        precision = ratio(tp, tp + fp)
        recall = ratio(tp, tp + fn)
        return cls(
            tp=tp, tn=tn, fp=fp, fn=fn,
            accuracy=ratio(tp + tn, total),
            precision=precision,
            recall=recall,
            f1=ratio(2 * precision * recall, precision + recall),
            prevalence_pred=ratio(tp + fp, total),
            prevalence_truth=ratio(tp + fn, total),
        )

    @property
    def n_dates(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _labels_as_dict(labels) -> dict[Date, bool]:
    if isinstance(labels, BlockingLabels):
        return labels.as_dict()
    return {d: bool(v) for d, v in dict(labels).items()}


def score(pred, truth, window="jja") -> EvalReport:
    """Confusion metrics of predicted labels over the window's dates.

    Every scored date needs a truth entry; days outside the window are
    ignored on both sides.
    """
    window = _as_window(window)
    pred_map = _labels_as_dict(pred)
    truth_map = _labels_as_dict(truth)
    tp = tn = fp = fn = 0
    for date in sorted(pred_map):
        if date not in window:
            continue
        if date not in truth_map:
            raise AlignmentError(f"no truth label for {date.isoformat()}")
        p, t = pred_map[date], truth_map[date]
        if p and t:
            tp += 1
        elif not p and not t:
            tn += 1
        elif p:
            fp += 1
        else:
            fn += 1
    return EvalReport.from_counts(tp, tn, fp, fn)


def monthly_agreement(pred_a, pred_b) -> dict[int, EvalReport]:
    """Per-calendar-month metrics of stream a with stream b as reference."""
    a = _labels_as_dict(pred_a)
    b = _labels_as_dict(pred_b)
    if set(a) != set(b):
        raise AlignmentError("label streams cover different dates")
    out: dict[int, EvalReport] = {}
    months = sorted({d.month for d in a})
    for month in months:
        counts = {"tp": 0, "tn": 0, "fp": 0, "fn": 0}
        for date, pa in a.items():
            if date.month != month:
                continue
            pb = b[date]
            if pa and pb:
                counts["tp"] += 1
            elif not pa and not pb:
                counts["tn"] += 1
            elif pa:
                counts["fp"] += 1
            else:
                counts["fn"] += 1
        out[month] = EvalReport.from_counts(**counts)
    return out


@dataclass(frozen=True)
class BreakdownRow:
    month: int
    day: int
    tn: int
    tp: int
    fp: int
    fn: int
    absent: bool

    @property
    def total(self) -> int:
        return self.tn + self.tp + self.fp + self.fn


@dataclass(frozen=True)
class TemporalBreakdown:
    rows: tuple[BreakdownRow, ...]

    def totals(self) -> tuple[int, int, int, int]:
        """(tn, tp, fp, fn) summed over all rows."""
        return (
            sum(r.tn for r in self.rows),
            sum(r.tp for r in self.rows),
            sum(r.fp for r in self.rows),
            sum(r.fn for r in self.rows),
        )


def temporal_breakdown(pred, truth, window="all",
                       calendar: Calendar | None = None) -> TemporalBreakdown:
    """Outcome counts per calendar (month, day) aggregated across years.

    Rows span every month-day inside the window that exists in either
    supported calendar; rows for dates the stream's calendar does not
    contain (day 31 of a 30-day month, say) are emitted with zero counts
    and flagged absent.
    """
    window = _as_window(window)
    pred_map = _labels_as_dict(pred)
    truth_map = _labels_as_dict(truth)
    per_md: dict[tuple[int, int], list[int]] = {}
    for date in sorted(pred_map):
        if date not in window:
            continue
        if date not in truth_map:
            raise AlignmentError(f"no truth label for {date.isoformat()}")
        counts = per_md.setdefault((date.month, date.day), [0, 0, 0, 0])
        p, t = pred_map[date], truth_map[date]
        if not p and not t:
            counts[0] += 1
        elif p and t:
            counts[1] += 1
        elif p:
            counts[2] += 1
        else:
            counts[3] += 1
    if not per_md:
        return TemporalBreakdown(rows=())
    # template: month-days in the observed span valid in either calendar
    lo = min(per_md)
    hi = max(per_md)
    template = [
        (month, day)
        for month in range(1, 13)
        for day in range(1, 32)
        if lo <= (month, day) <= hi
        and (month_day_valid(GREGORIAN, month, day)
             or month_day_valid(FIXED360, month, day))
    ]
    rows = []
    for month, day in template:
        counts = per_md.get((month, day), [0, 0, 0, 0])
        absent = False
        if calendar is not None:
            absent = not month_day_valid(calendar, month, day)
        rows.append(
            BreakdownRow(
                month=month, day=day,
                tn=counts[0], tp=counts[1], fp=counts[2], fn=counts[3],
                absent=absent,
            )
        )
    return TemporalBreakdown(rows=tuple(rows))


def write_report_csv(report: EvalReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "f1",
            "prevalence_pred", "prevalence_truth",
        ])
        writer.writerow([
            report.tp, report.tn, report.fp, report.fn,
            f"{report.accuracy:.6f}", f"{report.precision:.6f}",
            f"{report.recall:.6f}", f"{report.f1:.6f}",
            f"{report.prevalence_pred:.6f}", f"{report.prevalence_truth:.6f}",
        ])


def write_monthly_csv(reports: dict[int, EvalReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "precision", "recall", "f1", "n_dates"])
        for month in sorted(reports):
            r = reports[month]
            writer.writerow([
                f"{month:02d}", f"{r.precision:.6f}", f"{r.recall:.6f}",
                f"{r.f1:.6f}", r.n_dates,
            ])


def write_breakdown_csv(breakdown: TemporalBreakdown, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "day", "tn", "tp", "fp", "fn", "absent"])
        for r in breakdown.rows:
            writer.writerow([
                f"{r.month:02d}", f"{r.day:02d}", r.tn, r.tp, r.fp, r.fn,
                int(r.absent),
            ])


def write_disagreement_csv(counts, path) -> None:
    """Four-way split of correctness for two label streams."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "truth_class", "only_ours_correct", "only_baseline_correct",
            "both_correct", "both_incorrect",
        ])
        for name, row in (("blocked", counts.blocked), ("not_blocked", counts.not_blocked)):
            writer.writerow([
                name, row.only_ours, row.only_baseline, row.both, row.neither,
            ])
