"""File formats: gridded-series container, label CSVs, footprints,
GeoJSON contours, frequency CSV, VTI volumes, run manifests.

Every writer is deterministic: the same in-memory input produces
byte-identical files. The gridded-series container is a JSON header
next to a raw little-endian float32 payload, checksummed with CRC-32.
"""

from __future__ import annotations

import json
import os
import zlib

import numpy as np

from .calendars import Calendar, Date, calendar_by_name, parse_date
from .climatology import SeasonalCycle
from .detection import BlockingLabels, TrajectoryGraph
from .errors import CorruptInputError, MalformedHeaderError
from .grid import DailyFieldSeries, LatLonGrid
from .tracing import rings_lonlat
from .uncertainty import ContourBoxplot, FrequencyMap, TemporalStack

FORMAT_VERSION = 1


def file_crc32(path) -> int:
    crc = 0
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(1 << 20)
            if not chunk:
                return crc
            crc = zlib.crc32(chunk, crc)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _grid_to_json(grid: LatLonGrid) -> dict:
    return {
        "n_lat": grid.n_lat,
        "n_lon": grid.n_lon,
        "lat_centers": [float(v) for v in grid.lat_centers],
        "lon_centers": [float(v) for v in grid.lon_centers],
    }


def _grid_from_json(obj) -> LatLonGrid:
    try:
        grid = LatLonGrid(
            lat_centers=np.asarray(obj["lat_centers"], dtype=np.float64),
            lon_centers=np.asarray(obj["lon_centers"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedHeaderError(f"bad grid block: {exc}") from None
    if grid.n_lat != obj.get("n_lat") or grid.n_lon != obj.get("n_lon"):
        raise MalformedHeaderError("grid dims disagree with axis lengths")
    return grid


# ---------------------------------------------------------------------------
# gridded-series container

def _payload_path(header_path: str) -> str:
    stem, ext = os.path.splitext(header_path)
    return (stem if ext == ".json" else header_path) + ".bin"


def write_series(series: DailyFieldSeries, path) -> None:
    """JSON header at ``path`` plus a sibling ``.bin`` payload."""
    path = os.fspath(path)
    payload_path = _payload_path(path)
    payload = np.ascontiguousarray(series.values, dtype="<f4").tobytes()
    header = {
        "format_version": FORMAT_VERSION,
        "variable": series.variable,
        "units": series.units,
        "calendar": series.calendar.name,
        "dates": [d.isoformat() for d in series.dates],
        "grid": _grid_to_json(series.grid),
        "dtype": "<f4",
        "scale": 1.0,
        "offset": 0.0,
        "payload": os.path.basename(payload_path),
        "payload_bytes": len(payload),
        "payload_crc32": zlib.crc32(payload),
    }
    with open(payload_path, "wb") as fh:
        fh.write(payload)
    with open(path, "w") as fh:
        fh.write(_json_dumps(header))


def read_series(path) -> DailyFieldSeries:
    path = os.fspath(path)
    try:
        with open(path) as fh:
            header = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"{path}: header is not valid JSON: {exc}") from None
    if not isinstance(header, dict):
        raise MalformedHeaderError(f"{path}: header must be a JSON object")
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise MalformedHeaderError(f"{path}: unsupported format_version {version!r}")
    if header.get("dtype") != "<f4":
        raise MalformedHeaderError(f"{path}: unsupported dtype {header.get('dtype')!r}")
    for key in ("variable", "units", "calendar", "dates", "grid", "payload",
                "payload_bytes", "payload_crc32"):
        if key not in header:
            raise MalformedHeaderError(f"{path}: header misses {key!r}")
    try:
        calendar = calendar_by_name(header["calendar"])
    except Exception:
        raise MalformedHeaderError(
            f"{path}: unknown calendar {header['calendar']!r}"
        ) from None
    grid = _grid_from_json(header["grid"])
    dates = tuple(parse_date(text) for text in header["dates"])
    n_dates = len(dates)
    expected = 4 * n_dates * grid.n_lat * grid.n_lon
    if header["payload_bytes"] != expected:
        raise MalformedHeaderError(
            f"{path}: payload_bytes {header['payload_bytes']} != {expected} "
            f"for {n_dates} dates on a {grid.n_lat}x{grid.n_lon} grid"
        )
    payload_path = os.path.join(os.path.dirname(path) or ".", header["payload"])
    with open(payload_path, "rb") as fh:
        payload = fh.read()
    if len(payload) != expected:
        raise CorruptInputError(
            f"{payload_path}: payload is {len(payload)} bytes, expected {expected}"
        )
    if zlib.crc32(payload) != header["payload_crc32"]:
        raise CorruptInputError(f"{payload_path}: checksum mismatch")
    values = np.frombuffer(payload, dtype="<f4").reshape(
        n_dates, grid.n_lat, grid.n_lon
    ).astype(np.float64)
    scale = float(header.get("scale", 1.0))
    offset = float(header.get("offset", 0.0))
    if (scale, offset) != (1.0, 0.0):
        values = values * scale + offset
    return DailyFieldSeries(
        grid=grid,
        calendar=calendar,
        dates=dates,
        values=values,
        variable=header["variable"],
        units=header["units"],
    )


# ---------------------------------------------------------------------------
# seasonal cycle container (same header+payload scheme, float64)

_CYCLE_ARRAYS = ("raw_mean", "raw_std", "smoothed_mean", "smoothed_std")


def write_cycle(cycle: SeasonalCycle, path) -> None:
    cycle.require_smoothed()
    path = os.fspath(path)
    payload_path = _payload_path(path)
    stacked = np.stack([getattr(cycle, name) for name in _CYCLE_ARRAYS])
    payload = np.ascontiguousarray(stacked, dtype="<f8").tobytes()
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "seasonal_cycle",
        "cycle_length": cycle.cycle_length,
        "grid": _grid_to_json(cycle.grid),
        "dtype": "<f8",
        "arrays": list(_CYCLE_ARRAYS),
        "payload": os.path.basename(payload_path),
        "payload_bytes": len(payload),
        "payload_crc32": zlib.crc32(payload),
    }
    with open(payload_path, "wb") as fh:
        fh.write(payload)
    with open(path, "w") as fh:
        fh.write(_json_dumps(header))


def read_cycle(path) -> SeasonalCycle:
    path = os.fspath(path)
    try:
        with open(path) as fh:
            header = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"{path}: header is not valid JSON: {exc}") from None
    if header.get("kind") != "seasonal_cycle":
        raise MalformedHeaderError(f"{path}: not a seasonal-cycle file")
    if header.get("format_version") != FORMAT_VERSION:
        raise MalformedHeaderError(
            f"{path}: unsupported format_version {header.get('format_version')!r}"
        )
    if header.get("dtype") != "<f8" or header.get("arrays") != list(_CYCLE_ARRAYS):
        raise MalformedHeaderError(f"{path}: unexpected layout")
    grid = _grid_from_json(header["grid"])
    length = int(header["cycle_length"])
    expected = 8 * len(_CYCLE_ARRAYS) * length * grid.n_lat * grid.n_lon
    if header["payload_bytes"] != expected:
        raise MalformedHeaderError(
            f"{path}: payload_bytes {header['payload_bytes']} != {expected}"
        )
    payload_path = os.path.join(os.path.dirname(path) or ".", header["payload"])
    with open(payload_path, "rb") as fh:
        payload = fh.read()
    if len(payload) != expected:
        raise CorruptInputError(
            f"{payload_path}: payload is {len(payload)} bytes, expected {expected}"
        )
    if zlib.crc32(payload) != header["payload_crc32"]:
        raise CorruptInputError(f"{payload_path}: checksum mismatch")
    stacked = np.frombuffer(payload, dtype="<f8").reshape(
        len(_CYCLE_ARRAYS), length, grid.n_lat, grid.n_lon
    )
    return SeasonalCycle(
        grid=grid,
        cycle_length=length,
        raw_mean=stacked[0].copy(),
        raw_std=stacked[1].copy(),
        smoothed_mean=stacked[2].copy(),
        smoothed_std=stacked[3].copy(),
    )


# ---------------------------------------------------------------------------
# label streams (predictions and ground truth)

def write_labels_csv(labels, calendar: Calendar, path) -> None:
    """``date,label`` rows behind a ``# calendar=...`` comment line."""
    mapping = labels.as_dict() if isinstance(labels, BlockingLabels) else dict(labels)
    with open(path, "w", newline="") as fh:
        fh.write(f"# calendar={calendar.name}\n")
        fh.write("date,label\n")
        for date in sorted(mapping):
            fh.write(f"{date.isoformat()},{int(bool(mapping[date]))}\n")


def read_labels_csv(path) -> tuple[Calendar, dict[Date, bool]]:
    with open(path, newline="") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    calendar = calendar_by_name("gregorian365")
    start = 0
    if lines and lines[0].startswith("# calendar="):
        try:
            calendar = calendar_by_name(lines[0].split("=", 1)[1].strip())
        except Exception:
            raise MalformedHeaderError(f"{path}: unknown calendar line {lines[0]!r}") from None
        start = 1
    if start >= len(lines) or lines[start].strip() != "date,label":
        raise MalformedHeaderError(f"{path}: expected 'date,label' header")
    out: dict[Date, bool] = {}
    for lineno, line in enumerate(lines[start + 1:], start + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 or parts[1].strip() not in ("0", "1"):
            raise CorruptInputError(f"{path}:{lineno}: bad row {line!r}")
        date = parse_date(parts[0].strip())
        calendar.validate(date)
        if date in out:
            raise CorruptInputError(f"{path}:{lineno}: duplicate date {parts[0]}")
        out[date] = parts[1].strip() == "1"
    return calendar, out


# ---------------------------------------------------------------------------
# blocking footprints (component cell sets per positive day)

def write_footprints_json(labels: BlockingLabels, graph: TrajectoryGraph,
                          grid: LatLonGrid, path) -> None:
    entries = []
    for date in labels.dates:
        keys = labels.footprints.get(date)
        if not keys:
            continue
        comps = []
        for key in keys:
            cells = sorted(graph.node(key).cells)
            comps.append({"id": key[1], "cells": [[r, c] for r, c in cells]})
        entries.append({"date": date.isoformat(), "components": comps})
    doc = {
        "format_version": FORMAT_VERSION,
        "calendar": graph.calendar.name,
        "grid": _grid_to_json(grid),
        "entries": entries,
    }
    with open(path, "w") as fh:
        fh.write(_json_dumps(doc))


def read_footprints_json(path):
    """Returns (calendar, grid, {date: ((id, frozenset cells), ...)})."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedHeaderError(f"{path}: not valid JSON: {exc}") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise MalformedHeaderError(
            f"{path}: unsupported format_version {doc.get('format_version')!r}"
        )
    calendar = calendar_by_name(doc["calendar"])
    grid = _grid_from_json(doc["grid"])
    entries: dict[Date, tuple] = {}
    for entry in doc["entries"]:
        date = parse_date(entry["date"])
        calendar.validate(date)
        comps = tuple(
            (int(comp["id"]), frozenset((int(r), int(c)) for r, c in comp["cells"]))
            for comp in entry["components"]
        )
        if date in entries:
            raise CorruptInputError(f"{path}: duplicate footprint date {entry['date']}")
        entries[date] = comps
    return calendar, grid, entries


# ---------------------------------------------------------------------------
# GeoJSON contours

def _member_id_json(key):
    out = []
    for part in key:
        out.append(part.isoformat() if isinstance(part, Date) else part)
    return out


def _ring_features(cells, grid, properties) -> list[dict]:
    features = []
    for ring in rings_lonlat(cells, grid):
        features.append({
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[lon, lat] for lon, lat in ring],
            },
            "properties": dict(properties),
        })
    return features


def boxplot_features(boxplot: ContourBoxplot, date: str | None = None) -> list[dict]:
    """Median, envelopes and members as per-ring LineString features.

    Region outlines are traced at cell-corner resolution; an empty
    envelope contributes no feature.
    """
    grid = boxplot.ensemble.grid
    features = []

    def props(role, member_id=None, depth=None):
        return {"role": role, "date": date, "member_id": member_id, "depth": depth}

    features += _ring_features(
        boxplot.median_region, grid,
        props("median", _member_id_json(boxplot.median_key),
              boxplot.depths[boxplot.median_key]),
    )
    for role, hull in (("env50", boxplot.envelope50), ("env100", boxplot.envelope100)):
        if hull:
            features += _ring_features(hull, grid, props(role))
    for member in boxplot.ensemble.members:
        features += _ring_features(
            member.region, grid,
            props("member", _member_id_json(member.key), boxplot.depths[member.key]),
        )
    return features


def stack_median_features(stack: TemporalStack) -> list[dict]:
    """The per-date median boundary polylines of a temporal stack."""
    features = []
    for date, rings in zip(stack.dates, stack.medians):
        for ring in rings:
            features.append({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[lon, lat] for lon, lat in ring],
                },
                "properties": {
                    "role": "median", "date": date.isoformat(),
                    "member_id": None, "depth": None,
                },
            })
    return features


def write_geojson(features, path) -> None:
    doc = {"type": "FeatureCollection", "features": list(features)}
    with open(path, "w") as fh:
        fh.write(_json_dumps(doc))


def write_contours_geojson(boxplot: ContourBoxplot, path,
                           date: str | None = None) -> None:
    write_geojson(boxplot_features(boxplot, date), path)


# ---------------------------------------------------------------------------
# frequency heatmap CSV

def write_frequency_csv(fmap: FrequencyMap, path) -> None:
    """Header row = longitudes, first column = latitudes, cells = counts."""
    grid = fmap.grid
    with open(path, "w", newline="") as fh:
        fh.write("lat\\lon," + ",".join(f"{v:g}" for v in grid.lon_centers) + "\n")
        for i in range(grid.n_lat):
            row = ",".join(str(int(v)) for v in fmap.counts[i])
            fh.write(f"{grid.lat_centers[i]:g}," + row + "\n")


# ---------------------------------------------------------------------------
# VTI volume (VTK XML ImageData, inline ASCII)

def write_volume_vti(stack: TemporalStack, path) -> None:
    """Frequency voxels on (lon, lat, date) axes.

    Latitude is written south-to-north; a north-to-south grid is
    flipped so spacing stays positive.
    """
    grid = stack.grid
    lats = grid.lat_centers
    volume = np.asarray(stack.frequency, dtype=np.int64)
    if grid.n_lat > 1 and lats[0] > lats[-1]:
        lats = lats[::-1]
        volume = volume[:, ::-1, :]

    def spacing(axis: np.ndarray) -> float:
        return float(axis[1] - axis[0]) if axis.size > 1 else 1.0

    n_dates, n_lat, n_lon = volume.shape
    origin = (float(grid.lon_centers[0]), float(lats[0]), 0.0)
    steps = (spacing(grid.lon_centers), spacing(lats), 1.0)
    extent = f"0 {n_lon - 1} 0 {n_lat - 1} 0 {n_dates - 1}"
    # row-major (date, lat, lon) flattens with lon (x) fastest, date (z) slowest
    flat = volume.reshape(-1)
    lines = [
        '<?xml version="1.0"?>',
        '<VTKFile type="ImageData" version="0.1" byte_order="LittleEndian">',
        f'  <ImageData WholeExtent="{extent}"'
        f' Origin="{origin[0]:g} {origin[1]:g} {origin[2]:g}"'
        f' Spacing="{steps[0]:g} {steps[1]:g} {steps[2]:g}">',
        f'    <Piece Extent="{extent}">',
        '      <PointData Scalars="frequency">',
        '        <DataArray type="Int64" Name="frequency" format="ascii">',
        "          " + " ".join(str(int(v)) for v in flat),
        "        </DataArray>",
        "      </PointData>",
        "    </Piece>",
        "  </ImageData>",
        "</VTKFile>",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# run manifests

def write_manifest(out_path, command: str, parameters: dict,
                   inputs: list, outputs: list, timings_s: dict) -> str:
    """``<out>.manifest.json`` describing one CLI run.

    ``inputs`` entries are file paths; containers contribute their
    payload sibling as well so checksums cover all bytes read.
    """
    records = []
    for item in inputs:
        item = os.fspath(item)
        records.append({"path": item, "crc32": file_crc32(item)})
        if item.endswith(".json"):
            sibling = _payload_path(item)
            if sibling != item and os.path.exists(sibling):
                records.append({"path": sibling, "crc32": file_crc32(sibling)})
    manifest = {
        "format_version": FORMAT_VERSION,
        "command": command,
        "parameters": parameters,
        "inputs": records,
        "outputs": [os.fspath(p) for p in outputs],
        "timings_s": {k: round(float(v), 6) for k, v in timings_s.items()},
    }
    path = os.fspath(out_path) + ".manifest.json"
    with open(path, "w") as fh:
        fh.write(_json_dumps(manifest))
    return path
