"""Subcommand front-end: file in, file out, manifest alongside.

Exit codes: 0 success, 2 usage error, 3 data error. Every run writes a
``<out>.manifest.json`` recording the resolved parameters, input
checksums and per-stage timings, so a run is reproducible from the
manifest alone. ``--threads`` never changes any output.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from . import io_formats
from .calendars import Date, date_range
from .climatology import anomaly, build_seasonal_cycle, detrend_linear, normalize
from .detection import detect
from .dg83 import DG83Config, dg83_detect, disagreement_table
from .errors import BlocktrackError, InsufficientEnsembleError, InvalidArgumentError
from .evaluation import (
    DateWindow,
    monthly_agreement,
    score,
    temporal_breakdown,
    write_breakdown_csv,
    write_disagreement_csv,
    write_monthly_csv,
    write_report_csv,
)
from .grid import block_average, crop_domain
from .tuning import tune, write_surface_csv
from .uncertainty import (
    DEFAULT_EPSILON_GRID,
    build_stacks,
    contour_boxplot,
    contour_ensemble,
    frequency_map,
)
from .util import stage_timer

# published optima per calendar kind: (threshold, min overlap weight)
_DEFAULTS_BY_CALENDAR = {
    "gregorian365": (1.2, 31.0),
    "fixed360": (1.0, 31.0),
}

_LAMBDA_GRID_DEFAULT = "1.0:2.0:0.1"
_C_GRID_DEFAULT = "5:40:1"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _default_threads() -> int:
    env = os.environ.get("BLOCKTRACK_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _value_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("expected start:stop:step")
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            count = int(round((stop - start) / step)) + 1
            return tuple(round(start + i * step, 10) for i in range(count))
        values = tuple(float(p) for p in text.split(","))
        if not values:
            raise ValueError("empty grid")
        return values
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}") from None


def _window_arg(text: str) -> str:
    try:
        DateWindow(str(text))
    except InvalidArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return str(text)


def _crop_arg(text: str) -> tuple[float, float, float, float]:
    parts = str(text).split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"crop must be LATMIN:LATMAX:LONMIN:LONMAX, got {text!r}"
        )
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad crop bounds {text!r}") from None


def _block_arg(text: str) -> tuple[int, int]:
    parts = str(text).split(",")
    try:
        if len(parts) == 1:
            n = int(parts[0])
            return (n, n)
        if len(parts) == 2:
            return (int(parts[0]), int(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"block factors must be N or N,M, got {text!r}")


def _month_day_arg(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d{2})-(\d{2})", str(text))
    if not m:
        raise argparse.ArgumentTypeError(f"expected MM-DD, got {text!r}")
    month, day = int(m.group(1)), int(m.group(2))
    if not (1 <= month <= 12 and 1 <= day <= 31):
        raise argparse.ArgumentTypeError(f"month-day out of range: {text!r}")
    return (month, day)


def _stem(path: str) -> str:
    stem, _ = os.path.splitext(os.fspath(path))
    return stem


def _resolve_detection_defaults(args, calendar_name: str) -> tuple[float, float]:
    level, overlap = _DEFAULTS_BY_CALENDAR.get(
        calendar_name, _DEFAULTS_BY_CALENDAR["gregorian365"]
    )
    if getattr(args, "level", None) is not None:
        level = args.level
    if getattr(args, "min_overlap", None) is not None:
        overlap = args.min_overlap
    return float(level), float(overlap)


def _filter_window(mapping: dict, window: DateWindow) -> dict:
    return {d: v for d, v in mapping.items() if d in window}


def _write_labels_outputs(labels, graph, series, window_spec: str, out: str):
    """Labels CSV at ``out`` plus a footprints JSON sibling; returns
    (written label map, output paths)."""
    window = DateWindow(window_spec)
    mapping = _filter_window(labels.as_dict(), window)
    io_formats.write_labels_csv(mapping, series.calendar, out)
    foot_path = _stem(out) + ".footprints.json"
    kept_dates = tuple(d for d in labels.dates if d in window)
    kept = type(labels)(
        dates=kept_dates,
        blocked=tuple(labels.as_dict()[d] for d in kept_dates),
        footprints={d: labels.footprints[d] for d in kept_dates if d in labels.footprints},
    )
    io_formats.write_footprints_json(kept, graph, series.grid, foot_path)
    return mapping, [out, foot_path]


# ---------------------------------------------------------------------------
# subcommands

def cmd_preprocess(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        series = io_formats.read_series(args.input)
    with stage_timer(timings, "prepare"):
        if args.crop is not None:
            lat_min, lat_max, lon_min, lon_max = args.crop
            series = crop_domain(series, lat_min, lat_max, lon_min, lon_max)
        if args.block_average is not None:
            series = block_average(series, *args.block_average)
    with stage_timer(timings, "climatology"):
        cycle = build_seasonal_cycle(series, n_harmonics=args.n_harmonics)
    with stage_timer(timings, "anomaly"):
        anom = anomaly(series, cycle)
        if not args.no_detrend:
            anom = detrend_linear(anom)
        norm = normalize(anom, cycle, floor=args.floor)
    out = os.fspath(args.out)
    paths = {
        "normalized": out + ".normalized.json",
        "anomaly": out + ".anomaly.json",
        "cycle": out + ".cycle.json",
    }
    with stage_timer(timings, "write"):
        io_formats.write_series(norm, paths["normalized"])
        io_formats.write_series(anom, paths["anomaly"])
        io_formats.write_cycle(cycle, paths["cycle"])
    outputs = [p for p in paths.values()]
    outputs += [_stem(p) + ".bin" for p in paths.values()]
    io_formats.write_manifest(
        out, "preprocess",
        {
            "input": os.fspath(args.input),
            "crop": list(args.crop) if args.crop else None,
            "block_average": list(args.block_average) if args.block_average else None,
            "n_harmonics": args.n_harmonics,
            "floor": args.floor,
            "detrend": not args.no_detrend,
            "threads": args.threads,
        },
        [args.input], outputs, timings,
    )
    print(
        f"preprocess: {series.n_dates} days on {series.grid.n_lat}x{series.grid.n_lon}"
        f" -> {paths['normalized']}"
    )
    return 0


def cmd_detect(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        series = io_formats.read_series(args.input)
    level, overlap = _resolve_detection_defaults(args, series.calendar.name)
    with stage_timer(timings, "detect"):
        labels, graph = detect(
            series, level, overlap,
            min_days=args.min_days, connectivity=args.connectivity,
            threads=args.threads,
        )
    with stage_timer(timings, "write"):
        mapping, outputs = _write_labels_outputs(
            labels, graph, series, args.window, os.fspath(args.out)
        )
    io_formats.write_manifest(
        os.fspath(args.out), "detect",
        {
            "input": os.fspath(args.input),
            "lambda": level,
            "min_overlap": overlap,
            "min_days": args.min_days,
            "connectivity": args.connectivity,
            "window": args.window,
            "threads": args.threads,
        },
        [args.input], outputs, timings,
    )
    positive = sum(mapping.values())
    share = positive / len(mapping) if mapping else 0.0
    print(f"detect: {positive}/{len(mapping)} days blocked ({share:.1%}) -> {args.out}")
    return 0


def cmd_dg83(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        series = io_formats.read_series(args.input)
        cycle = io_formats.read_cycle(args.cycle)
    cfg = DG83Config(
        sigma_multiplier=args.sigma_multiplier,
        floor=args.floor,
        min_days=args.min_days,
        min_overlap_cells=args.min_overlap_cells,
        connectivity=args.connectivity,
        latitude_rescaling=args.latitude_rescaling,
    )
    with stage_timer(timings, "detect"):
        labels, graph = dg83_detect(series, cycle, cfg, threads=args.threads)
    with stage_timer(timings, "write"):
        mapping, outputs = _write_labels_outputs(
            labels, graph, series, args.window, os.fspath(args.out)
        )
    io_formats.write_manifest(
        os.fspath(args.out), "dg83",
        {
            "input": os.fspath(args.input),
            "cycle": os.fspath(args.cycle),
            "sigma_multiplier": args.sigma_multiplier,
            "floor": args.floor,
            "min_days": args.min_days,
            "min_overlap_cells": args.min_overlap_cells,
            "connectivity": args.connectivity,
            "latitude_rescaling": args.latitude_rescaling,
            "window": args.window,
            "threads": args.threads,
        },
        [args.input, args.cycle], outputs, timings,
    )
    positive = sum(mapping.values())
    share = positive / len(mapping) if mapping else 0.0
    print(f"dg83: {positive}/{len(mapping)} days blocked ({share:.1%}) -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        pred_cal, pred = io_formats.read_labels_csv(args.pred)
        _, truth = io_formats.read_labels_csv(args.truth)
    with stage_timer(timings, "score"):
        report = score(pred, truth, window=args.window)
    outputs = [os.fspath(args.out)]
    with stage_timer(timings, "write"):
        write_report_csv(report, args.out)
        if args.breakdown_out:
            breakdown = temporal_breakdown(
                pred, truth, window=args.window, calendar=pred_cal
            )
            write_breakdown_csv(breakdown, args.breakdown_out)
            outputs.append(os.fspath(args.breakdown_out))
    io_formats.write_manifest(
        os.fspath(args.out), "evaluate",
        {
            "pred": os.fspath(args.pred),
            "truth": os.fspath(args.truth),
            "window": args.window,
            "threads": args.threads,
        },
        [args.pred, args.truth], outputs, timings,
    )
    print(
        f"evaluate: n={report.n_dates} accuracy={report.accuracy:.3f}"
        f" precision={report.precision:.3f} recall={report.recall:.3f}"
        f" f1={report.f1:.3f}"
    )
    return 0


def cmd_compare(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        _, ours = io_formats.read_labels_csv(args.pred)
        _, base = io_formats.read_labels_csv(args.baseline)
        _, truth = io_formats.read_labels_csv(args.truth)
    window = DateWindow(args.window)
    with stage_timer(timings, "compare"):
        counts = disagreement_table(
            _filter_window(ours, window),
            _filter_window(base, window),
            truth,
        )
    outputs = [os.fspath(args.out)]
    with stage_timer(timings, "write"):
        write_disagreement_csv(counts, args.out)
        if args.monthly_out:
            monthly = monthly_agreement(
                _filter_window(ours, window), _filter_window(base, window)
            )
            write_monthly_csv(monthly, args.monthly_out)
            outputs.append(os.fspath(args.monthly_out))
    io_formats.write_manifest(
        os.fspath(args.out), "compare",
        {
            "pred": os.fspath(args.pred),
            "baseline": os.fspath(args.baseline),
            "truth": os.fspath(args.truth),
            "window": args.window,
            "threads": args.threads,
        },
        [args.pred, args.baseline, args.truth], outputs, timings,
    )
    blocked, not_blocked = counts.blocked, counts.not_blocked
    print(
        f"compare: blocked[ours/base/both/neither]="
        f"{blocked.only_ours}/{blocked.only_baseline}/{blocked.both}/{blocked.neither}"
        f" not_blocked={not_blocked.only_ours}/{not_blocked.only_baseline}"
        f"/{not_blocked.both}/{not_blocked.neither}"
    )
    return 0


def cmd_tune(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        series = io_formats.read_series(args.input)
        _, truth = io_formats.read_labels_csv(args.truth)
    with stage_timer(timings, "tune"):
        result = tune(
            series, truth, args.lambda_grid, args.c_grid,
            n_folds=args.n_folds, min_days=args.min_days,
            connectivity=args.connectivity, objective=args.objective,
            threads=args.threads,
        )
    out = os.fspath(args.out)
    best_path = _stem(out) + ".best.json"
    with stage_timer(timings, "write"):
        write_surface_csv(result, out)
        with open(best_path, "w") as fh:
            fh.write(json.dumps({
                "lambda": result.best_level,
                "min_overlap": result.best_min_overlap,
                "mean_score": result.best_score,
                "objective": result.objective,
                "fold_years": [list(f) for f in result.fold_years],
            }, indent=2, sort_keys=True) + "\n")
    io_formats.write_manifest(
        out, "tune",
        {
            "input": os.fspath(args.input),
            "truth": os.fspath(args.truth),
            "lambda_grid": list(args.lambda_grid),
            "C_grid": list(args.c_grid),
            "n_folds": args.n_folds,
            "min_days": args.min_days,
            "connectivity": args.connectivity,
            "objective": args.objective,
            "threads": args.threads,
        },
        [args.input, args.truth], [out, best_path], timings,
    )
    print(
        f"tune: best lambda={result.best_level:g}"
        f" C={result.best_min_overlap:g} mean_{result.objective}={result.best_score:.4f}"
    )
    return 0


def _yearly_members(entries, selector) -> dict[int, set]:
    """Per-year unions of footprint cells over the selected dates."""
    per_year: dict[int, set] = {}
    for date, comps in entries.items():
        if not selector(date):
            continue
        cells = per_year.setdefault(date.year, set())
        for _, comp_cells in comps:
            cells.update(comp_cells)
    return {y: c for y, c in per_year.items() if c}


def cmd_boxplot(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        _, grid, entries = io_formats.read_footprints_json(args.input)
    if args.date is not None:
        month, day = args.date
        selector = lambda d: (d.month, d.day) == (month, day)
        label = f"{month:02d}-{day:02d}"
    elif args.month is not None:
        selector = lambda d: d.month == args.month
        label = f"month:{args.month:02d}"
    else:
        selector = lambda d: d.month in (6, 7, 8)
        label = "jja"
    with stage_timer(timings, "boxplot"):
        members = _yearly_members(entries, selector)
        if len(members) < 3:
            raise InsufficientEnsembleError(
                f"only {len(members)} member years match {label}; need >= 3"
            )
        ensemble = contour_ensemble(
            grid, sorted(members.items()), kind="yearly"
        )
        boxplot = contour_boxplot(ensemble, args.epsilon_grid, threads=args.threads)
    with stage_timer(timings, "write"):
        io_formats.write_contours_geojson(boxplot, args.out, date=label)
    io_formats.write_manifest(
        os.fspath(args.out), "boxplot",
        {
            "input": os.fspath(args.input),
            "selector": label,
            "epsilon_grid": list(args.epsilon_grid),
            "threads": args.threads,
        },
        [args.input], [os.fspath(args.out)], timings,
    )
    print(
        f"boxplot: {ensemble.n} members, epsilon={boxplot.epsilon_used:g},"
        f" median={list(boxplot.median_key)} -> {args.out}"
    )
    return 0


def cmd_freqmap(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        _, grid, entries = io_formats.read_footprints_json(args.input)
    window = DateWindow(args.window)
    with stage_timer(timings, "count"):
        pairs = []
        for date, comps in entries.items():
            if date not in window:
                continue
            for _, cells in comps:
                pairs.append((date, cells))
        fmap = frequency_map(pairs, grid)
    with stage_timer(timings, "write"):
        io_formats.write_frequency_csv(fmap, args.out)
    io_formats.write_manifest(
        os.fspath(args.out), "freqmap",
        {
            "input": os.fspath(args.input),
            "window": args.window,
            "threads": args.threads,
        },
        [args.input], [os.fspath(args.out)], timings,
    )
    print(
        f"freqmap: {fmap.n_days} footprint days, max count {int(fmap.counts.max())}"
        f" -> {args.out}"
    )
    return 0


def cmd_stack(args) -> int:
    timings: dict[str, float] = {}
    with stage_timer(timings, "read"):
        calendar, grid, entries = io_formats.read_footprints_json(args.input)
    window = DateWindow(args.window)
    with stage_timer(timings, "stack"):
        selected = {d: comps for d, comps in entries.items() if d in window}
        if not selected:
            raise InsufficientEnsembleError("no footprints inside the window")
        # one ensemble per calendar day, members keyed by year
        by_md: dict[tuple[int, int], dict[int, set]] = {}
        for date, comps in selected.items():
            cells = by_md.setdefault((date.month, date.day), {}).setdefault(
                date.year, set()
            )
            for _, comp_cells in comps:
                cells.update(comp_cells)
        span = sorted(by_md)
        anchor = min(d.year for d in selected)
        boxplots = {}
        freqs = {}
        for (month, day), per_year in sorted(by_md.items()):
            at = Date(anchor, month, day)
            per_year = {y: c for y, c in per_year.items() if c}
            if len(per_year) < args.min_members:
                continue
            ensemble = contour_ensemble(grid, sorted(per_year.items()), kind="daily")
            boxplots[at] = contour_boxplot(
                ensemble, args.epsilon_grid, threads=args.threads
            )
            freqs[at] = frequency_map(
                [(Date(y, month, day), cells) for y, cells in per_year.items()],
                grid,
            )
        if not freqs:
            raise InsufficientEnsembleError(
                f"no calendar day has >= {args.min_members} member years"
            )
        stack = build_stacks(boxplots, freqs, calendar)
    out = os.fspath(args.out)
    medians_path = _stem(out) + ".medians.geojson"
    with stage_timer(timings, "write"):
        io_formats.write_volume_vti(stack, out)
        io_formats.write_geojson(io_formats.stack_median_features(stack), medians_path)
    io_formats.write_manifest(
        out, "stack",
        {
            "input": os.fspath(args.input),
            "window": args.window,
            "epsilon_grid": list(args.epsilon_grid),
            "min_members": args.min_members,
            "threads": args.threads,
        },
        [args.input], [out, medians_path], timings,
    )
    print(
        f"stack: {len(stack.dates)} slices ({span[0][0]:02d}-{span[0][1]:02d}"
        f"..{span[-1][0]:02d}-{span[-1][1]:02d}), {len(freqs)} with ensembles"
        f" -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# parser assembly

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="blocktrack",
        description="Blocking detection, tracking and ensemble summaries.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    built: dict[str, argparse.ArgumentParser] = {}

    def sub(name: str, func, help_text: str) -> argparse.ArgumentParser:
        sp = subparsers.add_parser(name, help=help_text)
        sp.add_argument("--config", help="JSON file with flag defaults")
        sp.add_argument("--threads", type=_positive_int, default=_default_threads(),
                        help="worker threads (default: BLOCKTRACK_THREADS or 1)")
        sp.set_defaults(func=func)
        built[name] = sp
        return sp

    sp = sub("preprocess", cmd_preprocess,
             "raw heights -> normalized anomalies, meter anomalies, cycle")
    sp.add_argument("--input", required=True, help="raw gridded-series container")
    sp.add_argument("--out", required=True, help="output path prefix")
    sp.add_argument("--crop", type=_crop_arg, default=None,
                    metavar="LATMIN:LATMAX:LONMIN:LONMAX")
    sp.add_argument("--block-average", type=_block_arg, default=None, metavar="N[,M]")
    sp.add_argument("--n-harmonics", type=_positive_int, default=6)
    sp.add_argument("--floor", type=float, default=100.0)
    sp.add_argument("--no-detrend", action="store_true")

    sp = sub("detect", cmd_detect, "label blocking on a normalized series")
    sp.add_argument("--input", required=True, help="normalized series container")
    sp.add_argument("--out", required=True, help="labels CSV path")
    sp.add_argument("--lambda", dest="level", type=float, default=None,
                    help="threshold (default 1.2 Gregorian, 1.0 Fixed360)")
    sp.add_argument("--min-overlap", type=float, default=None,
                    help="overlap weight to link days (default 31)")
    sp.add_argument("--min-days", type=_positive_int, default=5)
    sp.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    sp.add_argument("--window", type=_window_arg, default="all")

    sp = sub("dg83", cmd_dg83, "reference fixed-threshold detector")
    sp.add_argument("--input", required=True, help="meter-anomaly series container")
    sp.add_argument("--cycle", required=True, help="seasonal-cycle file")
    sp.add_argument("--out", required=True, help="labels CSV path")
    sp.add_argument("--sigma-multiplier", type=float, default=1.5)
    sp.add_argument("--floor", type=float, default=100.0)
    sp.add_argument("--min-overlap-cells", type=_positive_int, default=1)
    sp.add_argument("--min-days", type=_positive_int, default=5)
    sp.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    sp.add_argument("--latitude-rescaling", action="store_true")
    sp.add_argument("--window", type=_window_arg, default="all")

    sp = sub("evaluate", cmd_evaluate, "score predictions against truth")
    sp.add_argument("--pred", required=True, help="predicted labels CSV")
    sp.add_argument("--truth", required=True, help="truth labels CSV")
    sp.add_argument("--out", required=True, help="report CSV path")
    sp.add_argument("--window", type=_window_arg, default="jja")
    sp.add_argument("--breakdown-out", default=None,
                    help="per-calendar-day outcome CSV")

    sp = sub("compare", cmd_compare, "two detectors against shared truth")
    sp.add_argument("--pred", required=True, help="our labels CSV")
    sp.add_argument("--baseline", required=True, help="baseline labels CSV")
    sp.add_argument("--truth", required=True, help="truth labels CSV")
    sp.add_argument("--out", required=True, help="disagreement CSV path")
    sp.add_argument("--window", type=_window_arg, default="all")
    sp.add_argument("--monthly-out", default=None, help="per-month agreement CSV")

    sp = sub("tune", cmd_tune, "cross-validated grid search")
    sp.add_argument("--input", required=True, help="normalized series container")
    sp.add_argument("--truth", required=True, help="truth labels CSV")
    sp.add_argument("--out", required=True, help="score-surface CSV path")
    sp.add_argument("--lambda-grid", type=_value_grid,
                    default=_value_grid(_LAMBDA_GRID_DEFAULT),
                    help=f"threshold grid (default {_LAMBDA_GRID_DEFAULT})")
    sp.add_argument("--C-grid", dest="c_grid", type=_value_grid,
                    default=_value_grid(_C_GRID_DEFAULT),
                    help=f"overlap grid (default {_C_GRID_DEFAULT})")
    sp.add_argument("--n-folds", type=_positive_int, default=5)
    sp.add_argument("--min-days", type=_positive_int, default=5)
    sp.add_argument("--connectivity", type=int, choices=(4, 8), default=4)
    sp.add_argument("--objective", choices=("f1", "balance"), default="f1")

    sp = sub("boxplot", cmd_boxplot, "contour boxplot of footprint members")
    sp.add_argument("--input", required=True, help="footprints JSON")
    sp.add_argument("--out", required=True, help="GeoJSON path")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--date", type=_month_day_arg, default=None, metavar="MM-DD",
                       help="one member per year having this calendar day")
    group.add_argument("--month", type=int, choices=range(1, 13), default=None)
    group.add_argument("--season", action="store_const", const="jja", default=None,
                       help="June through August")
    sp.add_argument("--epsilon-grid", type=_value_grid,
                    default=DEFAULT_EPSILON_GRID)

    sp = sub("freqmap", cmd_freqmap, "per-cell blocked-day counts")
    sp.add_argument("--input", required=True, help="footprints JSON")
    sp.add_argument("--out", required=True, help="CSV path")
    sp.add_argument("--window", type=_window_arg, default="all")

    sp = sub("stack", cmd_stack, "per-day median/frequency stack volume")
    sp.add_argument("--input", required=True, help="footprints JSON")
    sp.add_argument("--out", required=True, help="VTI path")
    sp.add_argument("--window", type=_window_arg, default="jja")
    sp.add_argument("--epsilon-grid", type=_value_grid,
                    default=DEFAULT_EPSILON_GRID)
    sp.add_argument("--min-members", type=_positive_int, default=3)

    return parser, built


def _scan_config_path(argv) -> str | None:
    for i, item in enumerate(argv):
        if item == "--config":
            if i + 1 < len(argv):
                return argv[i + 1]
        elif item.startswith("--config="):
            return item.split("=", 1)[1]
    return None


def _apply_config(path: str, parsers: dict[str, argparse.ArgumentParser]) -> None:
    with open(path) as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise InvalidArgumentError(f"{path}: config must be a JSON object")
    reserved = {"func", "command", "config"}
    flat = {
        k: v for k, v in config.items()
        if k not in parsers and k not in reserved and not isinstance(v, dict)
    }
    for name, sp in parsers.items():
        sp.set_defaults(**flat)
        section = config.get(name)
        if isinstance(section, dict):
            sp.set_defaults(
                **{k: v for k, v in section.items() if k not in reserved}
            )


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, parsers = build_parser()
    try:
        config_path = _scan_config_path(argv)
        if config_path:
            _apply_config(config_path, parsers)
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            return 2
        return args.func(args)
    except BlocktrackError as exc:
        print(f"blocktrack: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"blocktrack: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
