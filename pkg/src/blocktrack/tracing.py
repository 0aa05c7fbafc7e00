"""Closed-ring tracing around raster cell sets.

Rings run along cell edges at corner resolution. Every exposed edge of
the cell set appears in exactly one ring; holes come out as their own
rings. Where two cells touch only at a corner, the walk takes the turn
that keeps each ring tight around its own cell run, so rings never
self-intersect.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .grid import LatLonGrid

Cell = tuple[int, int]
Vertex = tuple[int, int]  # (x, y) = (column corner, row corner)


def _boundary_edges(cells: frozenset[Cell] | set[Cell]) -> dict[Vertex, list[Vertex]]:
    """Directed exposed edges, keyed by start vertex.

    Directions are chosen per side so that each cell's interior stays on
    a consistent side of the walk.
    """
    edges: dict[Vertex, list[Vertex]] = {}

    def add(a: Vertex, b: Vertex) -> None:
        edges.setdefault(a, []).append(b)

    for r, c in cells:
        if (r - 1, c) not in cells:
            add((c, r), (c + 1, r))
        if (r, c + 1) not in cells:
            add((c + 1, r), (c + 1, r + 1))
        if (r + 1, c) not in cells:
            add((c + 1, r + 1), (c, r + 1))
        if (r, c - 1) not in cells:
            add((c, r + 1), (c, r))
    return edges


def trace_rings(cells) -> list[list[Vertex]]:
    """All closed rings bounding a cell set, in grid-corner coordinates.

    Returns rings as closed vertex lists (first == last). A single cell
    yields one five-point ring. The result is deterministic: rings start
    at their lexicographically smallest available edge.
    """
    cells = set(cells)
    if not cells:
        return []
    edges = _boundary_edges(cells)
    unused: set[tuple[Vertex, Vertex]] = {
        (a, b) for a, outs in edges.items() for b in outs
    }
    rings: list[list[Vertex]] = []
    while unused:
        start, current = min(unused)
        unused.discard((start, current))
        ring = [start, current]
        prev = start
        while current != start:
            options = [b for b in edges[current] if (current, b) in unused]
            if len(options) > 1:
                din = (current[0] - prev[0], current[1] - prev[1])
                # corner-touching cells: take the turn with positive cross
                # product so the ring hugs its own cell run
                options.sort(
                    key=lambda b: din[0] * (b[1] - current[1])
                    - din[1] * (b[0] - current[0]),
                    reverse=True,
                )
            nxt = options[0]
            unused.discard((current, nxt))
            ring.append(nxt)
            prev, current = current, nxt
        rings.append(ring)
    return rings


def corner_axes(grid: LatLonGrid) -> tuple[np.ndarray, np.ndarray]:
    """Cell-corner coordinates, shapes (n_lon + 1,) and (n_lat + 1,).

    Corners are midpoints between adjacent centers, extrapolated by half
    a step at the edges. Single-cell axes fall back to a half-degree
    margin.
    """

    def corners(centers: np.ndarray) -> np.ndarray:
        n = centers.size
        if n == 1:
            return np.array([centers[0] - 0.5, centers[0] + 0.5])
        mid = (centers[:-1] + centers[1:]) / 2.0
        first = centers[0] - (centers[1] - centers[0]) / 2.0
        last = centers[-1] + (centers[-1] - centers[-2]) / 2.0
        return np.concatenate([[first], mid, [last]])

    return corners(grid.lon_centers), corners(grid.lat_centers)


def rings_lonlat(cells, grid: LatLonGrid) -> list[list[tuple[float, float]]]:
    """Trace rings and map corner indices to (lon, lat) degree pairs."""
    lon_c, lat_c = corner_axes(grid)
    out = []
    for ring in trace_rings(cells):
        for x, y in ring:
            if not (0 <= x < lon_c.size and 0 <= y < lat_c.size):
                raise InvalidArgumentError("cell indices fall outside the grid")
        out.append([(float(lon_c[x]), float(lat_c[y])) for x, y in ring])
    return out
