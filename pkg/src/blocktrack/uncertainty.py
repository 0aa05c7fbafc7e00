"""Ensemble summaries of detected footprints.

Members of an ensemble are raster footprint regions with their boundary
cells. Three summaries are provided:

* contour boxplots built on a relaxed band depth: the band of a member
  pair is the symmetric difference of their regions, a member is inside
  a band when at most a fraction epsilon of its boundary cells falls
  outside, and its depth is the fraction of all unordered pairs it is
  inside; the deepest member is the median, and union-minus-intersection
  regions of the deepest half and of all members give the 50% and 100%
  envelopes,
* frequency maps counting, per cell, the number of distinct days on
  which the cell lay inside any footprint,
* temporal stacks that assemble per-date median boundary polylines and
  per-date frequency slices along a date axis.

Depth scoring counts every unordered pair (j, k) with j < k, including
the pairs a member itself belongs to, so an n-member ensemble always
scores against n(n-1)/2 bands.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .calendars import Calendar, Date, date_range
from .detection import boundary_mask
from .errors import (
    AlignmentError,
    InsufficientEnsembleError,
    InvalidArgumentError,
    ShapeError,
)
from .grid import LatLonGrid
from .tracing import rings_lonlat
from .util import parallel_map

Cell = tuple[int, int]

DEFAULT_EPSILON_GRID = tuple(round(0.05 * i, 2) for i in range(11))


@dataclass(frozen=True)
class EnsembleMember:
    """One footprint region with its boundary cells.

    ``key`` is any sortable identity (dates first, then an index); ties
    in depth are broken by the smallest key.
    """

    key: tuple
    region: frozenset[Cell]
    boundary: frozenset[Cell]

    def __post_init__(self) -> None:
        if not self.region:
            raise InvalidArgumentError(f"member {self.key} has an empty region")
        if not self.boundary:
            raise InvalidArgumentError(f"member {self.key} has an empty boundary")
        if not self.boundary <= self.region:
            raise InvalidArgumentError(f"member {self.key}: boundary not inside region")


@dataclass(frozen=True)
class ContourEnsemble:
    grid: LatLonGrid
    members: tuple[EnsembleMember, ...]
    kind: str = "daily"

    def __post_init__(self) -> None:
        if len(self.members) < 1:
            raise InsufficientEnsembleError("ensemble needs at least one member")
        keys = [m.key for m in self.members]
        if len(set(keys)) != len(keys):
            raise InvalidArgumentError("duplicate member keys")
        # canonical order makes every downstream product permutation-stable
        object.__setattr__(
            self, "members", tuple(sorted(self.members, key=lambda m: m.key))
        )
        n_lat, n_lon = self.grid.shape
        for m in self.members:
            for r, c in m.region:
                if not (0 <= r < n_lat and 0 <= c < n_lon):
                    raise ShapeError(f"member {m.key} has cells outside the grid")

    @property
    def n(self) -> int:
        return len(self.members)


def region_boundary(region: frozenset[Cell] | set[Cell], grid: LatLonGrid) -> frozenset[Cell]:
    """Boundary cells of a region: 4-neighbor exposure or domain edge."""
    n_lat, n_lon = grid.shape
    mask = np.zeros(grid.shape, dtype=bool)
    for r, c in region:
        if not (0 <= r < n_lat and 0 <= c < n_lon):
            raise ShapeError(f"cell ({r}, {c}) outside the {n_lat}x{n_lon} grid")
        mask[r, c] = True
    bnd = boundary_mask(mask)
    return frozenset((int(r), int(c)) for r, c in zip(*np.nonzero(bnd)))


def contour_ensemble(grid: LatLonGrid, regions, kind: str = "daily") -> ContourEnsemble:
    """Build an ensemble from (key, cell set) pairs, deriving boundaries."""
    members = tuple(
        EnsembleMember(
            key=tuple(key) if isinstance(key, (list, tuple)) else (key,),
            region=frozenset(region),
            boundary=region_boundary(region, grid),
        )
        for key, region in regions
    )
    return ContourEnsemble(grid=grid, members=members, kind=kind)


def band(region_j, region_k) -> frozenset[Cell]:
    """Region lying between two footprint boundaries.

    Realized on the raster as the symmetric difference of the two
    regions: identical regions give an empty band, disjoint regions give
    their union.
    """
    return frozenset(frozenset(region_j) ^ frozenset(region_k))


def mismatch(boundary_i, band_jk) -> float:
    """Fraction of a boundary lying outside a band."""
    boundary_i = frozenset(boundary_i)
    if not boundary_i:
        raise InvalidArgumentError("member boundary is empty")
    outside = len(boundary_i - frozenset(band_jk))
    return outside / len(boundary_i)


@dataclass(frozen=True)
class MismatchMatrix:
    """Mismatch fractions of every member against every pair band.

    ``values[i, p]`` is the mismatch of member i against the band of the
    p-th unordered pair in ``pairs`` (lexicographic over (j, k), j < k).
    """

    n: int
    pairs: tuple[tuple[int, int], ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        expected = (self.n, len(self.pairs))
        if vals.shape != expected:
            raise ShapeError(f"matrix shape {vals.shape}, expected {expected}")
        if vals.size and (vals.min() < 0 or vals.max() > 1):
            raise InvalidArgumentError("mismatch entries must lie in [0, 1]")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def mismatch_matrix(ensemble: ContourEnsemble, threads: int = 1) -> MismatchMatrix:
    """Mismatch of every member boundary against every pair band.

    Vectorized over cells: each member's boundary and region become rows
    of boolean matrices over the union of occupied cells, so one matrix
    product covers all member/pair combinations.
    """
    n = ensemble.n
    pairs = tuple(combinations(range(n), 2))
    cells = sorted({c for m in ensemble.members for c in m.region})
    index = {cell: i for i, cell in enumerate(cells)}
    regions = np.zeros((n, len(cells)), dtype=bool)
    boundaries = np.zeros((n, len(cells)), dtype=bool)
    sizes = np.zeros(n)
    for i, m in enumerate(ensemble.members):
        for cell in m.region:
            regions[i, index[cell]] = True
        for cell in m.boundary:
            boundaries[i, index[cell]] = True
        sizes[i] = len(m.boundary)

    def one(p: int) -> np.ndarray:
        j, k = pairs[p]
        inside_band = regions[j] ^ regions[k]
        outside = boundaries & ~inside_band[None, :]
        return outside.sum(axis=1) / sizes

    cols = parallel_map(one, range(len(pairs)), threads)
    values = np.stack(cols, axis=1) if cols else np.zeros((n, 0))
    return MismatchMatrix(n=n, pairs=pairs, values=values)


def relaxed_depth(matrix: MismatchMatrix, epsilon: float) -> np.ndarray:
    """Depth per member: fraction of all pair bands it sits inside.

    A member is inside a band when its mismatch is at most ``epsilon``.
    """
    if not (0.0 <= epsilon < 1.0):
        raise InvalidArgumentError(f"epsilon must lie in [0, 1), got {epsilon}")
    if not matrix.pairs:
        raise InsufficientEnsembleError("no pairs to score against")
    return (matrix.values <= epsilon).mean(axis=1)


def _ranking(depths: np.ndarray, members) -> list[int]:
    """Member indices from deepest to shallowest; key breaks ties."""
    return sorted(range(len(members)), key=lambda i: (-depths[i], members[i].key))


def select_epsilon(matrix: MismatchMatrix, candidates=DEFAULT_EPSILON_GRID,
                   members=None, top_count: int | None = None) -> float:
    """Smallest candidate whose top-half ranking agrees with the next one.

    A candidate qualifies when the identity of the ``top_count`` deepest
    members (half the ensemble by default) is unchanged at the next
    larger candidate and at least one depth is positive. Falls back to
    the largest candidate when none qualifies.
    """
    eps = [float(e) for e in candidates]
    if len(eps) < 2:
        raise InvalidArgumentError("need at least 2 epsilon candidates")
    if any(b <= a for a, b in zip(eps, eps[1:])):
        raise InvalidArgumentError("epsilon candidates must be strictly increasing")
    if members is None:
        members = [_IndexKey(i) for i in range(matrix.n)]
    if top_count is None:
        top_count = (matrix.n + 1) // 2
    tops = []
    maxima = []
    for e in eps:
        depths = relaxed_depth(matrix, e)
        tops.append(frozenset(_ranking(depths, members)[:top_count]))
        maxima.append(depths.max() if depths.size else 0.0)
    for i in range(len(eps) - 1):
        if tops[i] == tops[i + 1] and maxima[i] > 0:
            return eps[i]
    return eps[-1]


class _IndexKey:
    """Stand-in member giving plain index order for bare matrices."""

    __slots__ = ("key",)

    def __init__(self, i: int):
        self.key = (i,)


@dataclass(frozen=True)
class ContourBoxplot:
    ensemble: ContourEnsemble
    epsilon_used: float
    depths: dict[tuple, float]
    median_key: tuple
    envelope50: frozenset[Cell]
    envelope100: frozenset[Cell]

    @property
    def median_member(self) -> EnsembleMember:
        for m in self.ensemble.members:
            if m.key == self.median_key:
                return m
        raise KeyError(self.median_key)

    @property
    def median_region(self) -> frozenset[Cell]:
        return self.median_member.region

    @property
    def median_boundary(self) -> frozenset[Cell]:
        return self.median_member.boundary


def contour_boxplot(ensemble: ContourEnsemble,
                    epsilon_grid=DEFAULT_EPSILON_GRID,
                    threads: int = 1) -> ContourBoxplot:
    """Median and envelopes of a footprint ensemble.

    Needs at least three members so that pairs not involving a member
    exist. The member order never matters: depths, the median and both
    envelopes are identical for any permutation of the input.
    """
    if ensemble.n < 3:
        raise InsufficientEnsembleError(
            f"contour boxplot needs >= 3 members, got {ensemble.n}"
        )
    matrix = mismatch_matrix(ensemble, threads)
    epsilon = select_epsilon(matrix, epsilon_grid, ensemble.members)
    depths = relaxed_depth(matrix, epsilon)
    order = _ranking(depths, ensemble.members)
    median = ensemble.members[order[0]]
    half = [ensemble.members[i] for i in order[: (ensemble.n + 1) // 2]]

    def hull(members) -> frozenset[Cell]:
        union: set[Cell] = set()
        inter: set[Cell] | None = None
        for m in members:
            union |= m.region
            inter = set(m.region) if inter is None else inter & m.region
        return frozenset(union - (inter or set()))

    return ContourBoxplot(
        ensemble=ensemble,
        epsilon_used=float(epsilon),
        depths={m.key: float(depths[i]) for i, m in enumerate(ensemble.members)},
        median_key=median.key,
        envelope50=hull(half),
        envelope100=hull(ensemble.members),
    )


@dataclass(frozen=True)
class FrequencyMap:
    """Per-cell count of days covered by any footprint."""

    grid: LatLonGrid
    counts: np.ndarray
    n_days: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.shape != self.grid.shape:
            raise ShapeError(
                f"counts shape {counts.shape} does not match grid {self.grid.shape}"
            )
        if counts.size and counts.min() < 0:
            raise InvalidArgumentError("counts must be non-negative")
        if self.n_days < 0:
            raise InvalidArgumentError("n_days must be non-negative")
        if counts.size and counts.max() > self.n_days:
            raise InvalidArgumentError("cell count exceeds the number of days")
        counts = counts.astype(np.int64).copy()
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    def fractions(self) -> np.ndarray:
        """Counts as a fraction of the ensemble's days."""
        if self.n_days == 0:
            return np.zeros(self.grid.shape)
        return self.counts / float(self.n_days)


def frequency_map(footprints, grid: LatLonGrid) -> FrequencyMap:
    """Count distinct covering dates per cell.

    ``footprints`` is an iterable of (date, cell set). Multiple
    footprints on one date count once per cell: the quantity is a number
    of days, not of systems.
    """
    per_date: dict[Date, set[Cell]] = {}
    for date, cells in footprints:
        per_date.setdefault(date, set()).update(cells)
    counts = np.zeros(grid.shape, dtype=np.int64)
    n_lat, n_lon = grid.shape
    for cells in per_date.values():
        for r, c in cells:
            if not (0 <= r < n_lat and 0 <= c < n_lon):
                raise ShapeError("footprint cell outside the grid")
            counts[r, c] += 1
    return FrequencyMap(grid=grid, counts=counts, n_days=len(per_date))


@dataclass(frozen=True)
class TemporalStack:
    """Per-date median polylines and frequency slices on a shared axis.

    ``medians[t]`` is a tuple of closed (lon, lat) polylines traced
    around the median boundary cells for ``dates[t]`` (empty when the
    date had no ensemble). ``frequency`` stacks the per-date count
    slices, shape (n_dates, n_lat, n_lon).
    """

    grid: LatLonGrid
    dates: tuple[Date, ...]
    medians: tuple[tuple[tuple[tuple[float, float], ...], ...], ...]
    frequency: np.ndarray

    def __post_init__(self) -> None:
        freq = np.asarray(self.frequency)
        expected = (len(self.dates), self.grid.n_lat, self.grid.n_lon)
        if freq.shape != expected:
            raise ShapeError(f"frequency shape {freq.shape}, expected {expected}")
        if len(self.medians) != len(self.dates):
            raise ShapeError("medians and dates differ in length")
        freq = freq.astype(np.int64).copy()
        freq.flags.writeable = False
        object.__setattr__(self, "frequency", freq)


def build_stacks(daily_boxplots: dict[Date, ContourBoxplot],
                 daily_freq: dict[Date, FrequencyMap],
                 calendar: Calendar) -> TemporalStack:
    """Assemble per-date summaries into a gap-free dated stack.

    Both maps must cover the same dates. The stack axis runs day by day
    from the earliest to the latest date; dates missing from the maps
    become empty slices.
    """
    if set(daily_boxplots) != set(daily_freq):
        raise AlignmentError("boxplot and frequency maps cover different dates")
    if not daily_freq:
        raise InvalidArgumentError("nothing to stack")
    grids = {fm.grid for fm in daily_freq.values()}
    if len(grids) != 1:
        raise ShapeError("frequency slices are on different grids")
    grid = next(iter(grids))
    for bp in daily_boxplots.values():
        if bp.ensemble.grid != grid:
            raise ShapeError("boxplots and frequency slices are on different grids")
    have = sorted(daily_freq)
    dates = tuple(date_range(calendar, have[0], have[-1]))
    medians = []
    slices = np.zeros((len(dates), grid.n_lat, grid.n_lon), dtype=np.int64)
    for t, date in enumerate(dates):
        if date in daily_freq:
            slices[t] = daily_freq[date].counts
            rings = rings_lonlat(daily_boxplots[date].median_region, grid)
            medians.append(tuple(tuple((x, y) for x, y in ring) for ring in rings))
        else:
            medians.append(())
    return TemporalStack(
        grid=grid, dates=dates, medians=tuple(medians), frequency=slices
    )
