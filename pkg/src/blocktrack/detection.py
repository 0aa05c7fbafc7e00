"""Superlevel-set extraction, overlap tracking and persistence labeling.

A day's candidate systems are the connected components of the cells at
or above a threshold. Components on consecutive days are linked when
the cosine-latitude weight of their shared cells reaches a minimum
overlap, forming a day-to-day correspondence DAG in which systems may
appear, vanish, merge or split. A component is part of a blocking
episode when some continuous chain through it spans a minimum number of
days (five by default); every day touched by a qualifying chain is
labeled blocked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .calendars import Calendar, Date
from .errors import InvalidArgumentError, ShapeError
from .grid import DailyFieldSeries, LatLonGrid
from .util import parallel_map

# (date, per-day index); sorts chronologically then by extraction order
ComponentKey = tuple[Date, int]

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Component:
    """One day's contiguous superlevel-set region."""

    date: Date
    index: int
    grid: LatLonGrid
    cells: frozenset[tuple[int, int]]
    weighted_area: float
    boundary_cells: frozenset[tuple[int, int]]

    @property
    def key(self) -> ComponentKey:
        return (self.date, self.index)

    def __repr__(self) -> str:
        return (
            f"Component({self.date.isoformat()}#{self.index}, "
            f"{len(self.cells)} cells, area={self.weighted_area:.3f})"
        )


def _connectivity_structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return _STRUCTURE_4
    if connectivity == 8:
        return _STRUCTURE_8
    raise InvalidArgumentError(f"connectivity must be 4 or 8, got {connectivity}")


def boundary_mask(mask: np.ndarray) -> np.ndarray:
    """Cells of ``mask`` with a 4-neighbor outside it or on the domain edge."""
    inner = np.zeros_like(mask)
    inner[1:-1, 1:-1] = (
        mask[1:-1, 1:-1]
        & mask[:-2, 1:-1]
        & mask[2:, 1:-1]
        & mask[1:-1, :-2]
        & mask[1:-1, 2:]
    )
    return mask & ~inner


def extract_components(field: np.ndarray, level: float, grid: LatLonGrid,
                       date: Date, connectivity: int = 4) -> list[Component]:
    """Connected components of ``{cell : field >= level}``.

    The threshold is inclusive. Components are indexed in raster-scan
    order of their first cell, which keeps ids stable across runs.
    Boundary cells always use the 4-neighbor rule, whatever the
    connectivity used for the components themselves.
    """
    structure = _connectivity_structure(connectivity)
    arr = np.asarray(field, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ShapeError(f"field shape {arr.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("field must be finite")
    mask = arr >= level
    if not mask.any():
        return []
    labels, n = ndimage.label(mask, structure=structure)
    weights = grid.row_weights()
    boundary = boundary_mask(mask)
    out = []
    for lbl in range(1, n + 1):
        rows, cols = np.nonzero(labels == lbl)
        cells = frozenset(zip(rows.tolist(), cols.tolist()))
        area = float(weights[rows].sum())
        bnd = frozenset(
            (int(r), int(c)) for r, c in zip(rows, cols) if boundary[r, c]
        )
        out.append(
            Component(
                date=date,
                index=lbl - 1,
                grid=grid,
                cells=cells,
                weighted_area=area,
                boundary_cells=bnd,
            )
        )
    return out


def weighted_overlap(a: Component, b: Component) -> float:
    """Sum of cos(latitude) over the cells shared by two components."""
    if a.grid != b.grid:
        raise ShapeError("components live on different grids")
    shared = a.cells & b.cells
    if not shared:
        return 0.0
    weights = a.grid.row_weights()
    return float(sum(weights[r] for r, _ in shared))


def cell_overlap(a: Component, b: Component) -> int:
    """Number of cells shared by two components."""
    if a.grid != b.grid:
        raise ShapeError("components live on different grids")
    return len(a.cells & b.cells)


class TrajectoryGraph:
    """Day-to-day correspondence DAG over components.

    Edges run from a component to a component on the immediately
    following date and carry the overlap value that admitted them. All
    overlaps meet the construction threshold; nothing is pruned to a
    single best successor, so merges and splits stay visible.
    """

    def __init__(self, components, edges, calendar: Calendar,
                 min_overlap: float = 0.0):
        self._nodes: dict[ComponentKey, Component] = {}
        for comp in components:
            if comp.key in self._nodes:
                raise InvalidArgumentError(f"duplicate component key {comp.key}")
            self._nodes[comp.key] = comp
        self.calendar = calendar
        self.min_overlap = float(min_overlap)
        self._succ: dict[ComponentKey, list[ComponentKey]] = {}
        self._pred: dict[ComponentKey, list[ComponentKey]] = {}
        self._edges: dict[tuple[ComponentKey, ComponentKey], float] = {}
        for a_key, b_key, overlap in edges:
            if a_key not in self._nodes or b_key not in self._nodes:
                raise InvalidArgumentError(f"edge endpoint missing: {a_key} -> {b_key}")
            if not calendar.consecutive(a_key[0], b_key[0]):
                raise InvalidArgumentError(
                    f"edge {a_key} -> {b_key} does not span consecutive dates"
                )
            if overlap < self.min_overlap:
                raise InvalidArgumentError(
                    f"edge overlap {overlap} below threshold {self.min_overlap}"
                )
            self._edges[(a_key, b_key)] = float(overlap)
            self._succ.setdefault(a_key, []).append(b_key)
            self._pred.setdefault(b_key, []).append(a_key)

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def node(self, key: ComponentKey) -> Component:
        return self._nodes[key]

    def nodes(self) -> list[Component]:
        return [self._nodes[k] for k in sorted(self._nodes)]

    def edges(self) -> list[tuple[ComponentKey, ComponentKey, float]]:
        return [(a, b, self._edges[(a, b)]) for a, b in sorted(self._edges)]

    def successors(self, key: ComponentKey) -> list[ComponentKey]:
        return sorted(self._succ.get(key, []))

    def predecessors(self, key: ComponentKey) -> list[ComponentKey]:
        return sorted(self._pred.get(key, []))

    def chain_lengths(self) -> dict[ComponentKey, int]:
        """Longest chain through each node, in days.

        Two passes over the nodes in date order: longest ancestor path
        ending at each node, longest descendant path starting at it.
        The chain through a node is ancestors + the node + descendants.
        """
        order = sorted(self._nodes)
        up: dict[ComponentKey, int] = {}
        for key in order:
            preds = self._pred.get(key, ())
            up[key] = max((up[p] + 1 for p in preds), default=0)
        down: dict[ComponentKey, int] = {}
        for key in reversed(order):
            succs = self._succ.get(key, ())
            down[key] = max((down[s] + 1 for s in succs), default=0)
        return {key: up[key] + 1 + down[key] for key in order}


@dataclass(frozen=True)
class BlockingLabels:
    """Per-date blocked flags plus the component keys that caused them."""

    dates: tuple[Date, ...]
    blocked: tuple[bool, ...]
    footprints: dict[Date, tuple[ComponentKey, ...]]

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.blocked):
            raise ShapeError("dates and blocked flags differ in length")
        for date, flag in zip(self.dates, self.blocked):
            keys = self.footprints.get(date, ())
            if flag != bool(keys):
                raise InvalidArgumentError(
                    f"{date.isoformat()}: blocked flag inconsistent with footprints"
                )

    def as_dict(self) -> dict[Date, bool]:
        return dict(zip(self.dates, self.blocked))

    @property
    def n_blocked(self) -> int:
        return sum(self.blocked)


def label_blocking(graph: TrajectoryGraph, min_days: int = 5,
                   dates: tuple[Date, ...] | None = None) -> BlockingLabels:
    """Mark every day touched by a chain of at least ``min_days`` days.

    ``dates`` widens the label coverage beyond the graph's own dates
    (days without components are plain negatives). When omitted, the
    graph's date set is used.
    """
    if min_days < 1:
        raise InvalidArgumentError(f"min_days must be >= 1, got {min_days}")
    lengths = graph.chain_lengths()
    positive: dict[Date, list[ComponentKey]] = {}
    for key, chain_len in lengths.items():
        if chain_len >= min_days:
            positive.setdefault(key[0], []).append(key)
    if dates is None:
        dates = tuple(sorted({k[0] for k in lengths}))
    else:
        dates = tuple(dates)
    footprints = {d: tuple(sorted(positive.get(d, ()))) for d in dates if d in positive}
    blocked = tuple(d in footprints for d in dates)
    return BlockingLabels(dates=dates, blocked=blocked, footprints=footprints)


def build_trajectory_graph(components_by_date: dict[Date, list[Component]],
                           min_overlap: float, calendar: Calendar,
                           overlap_fn=weighted_overlap) -> TrajectoryGraph:
    """Link components on consecutive dates whose overlap reaches the threshold.

    ``overlap_fn`` computes the overlap statistic; the default is the
    cosine-latitude weighted shared area. Comparison is inclusive.
    """
    nodes = [c for comps in components_by_date.values() for c in comps]
    edges = []
    dates = sorted(components_by_date)
    for day, nxt in zip(dates, dates[1:]):
        if not calendar.consecutive(day, nxt):
            continue
        for a in components_by_date[day]:
            for b in components_by_date[nxt]:
                overlap = overlap_fn(a, b)
                if overlap >= min_overlap:
                    edges.append((a.key, b.key, overlap))
    return TrajectoryGraph(nodes, edges, calendar, min_overlap=min_overlap)


def extract_all_components(series: DailyFieldSeries, level: float,
                           connectivity: int = 4,
                           threads: int = 1) -> dict[Date, list[Component]]:
    """Per-date component extraction; parallel over days."""

    def one(i: int) -> list[Component]:
        return extract_components(
            series.values[i], level, series.grid, series.dates[i], connectivity
        )

    results = parallel_map(one, range(series.n_dates), threads)
    return dict(zip(series.dates, results))


def detect(series: DailyFieldSeries, level: float, min_overlap: float,
           min_days: int = 5, connectivity: int = 4,
           threads: int = 1) -> tuple[BlockingLabels, TrajectoryGraph]:
    """Full detection pass over a normalized series.

    Returns labels over every series date together with the trajectory
    graph that produced them. Output is independent of ``threads``.
    """
    comps = extract_all_components(series, level, connectivity, threads)
    graph = build_trajectory_graph(comps, min_overlap, series.calendar)
    labels = label_blocking(graph, min_days, dates=series.dates)
    return labels, graph
