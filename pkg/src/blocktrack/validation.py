"""Input checks shared by the estimator layer."""

from __future__ import annotations

import numpy as np

from .calendars import Date
from .detection import BlockingLabels
from .errors import AlignmentError, InvalidArgumentError
from .grid import DailyFieldSeries


def ensure_series(X) -> DailyFieldSeries:
    if not isinstance(X, DailyFieldSeries):
        raise InvalidArgumentError(
            f"expected a DailyFieldSeries, got {type(X).__name__}"
        )
    return X


def ensure_label_map(y, dates) -> dict[Date, bool]:
    """Accept a date->bool mapping, a BlockingLabels, or a sequence
    aligned with ``dates``; return a plain dict covering all dates."""
    if isinstance(y, BlockingLabels):
        mapping = y.as_dict()
    elif hasattr(y, "keys"):
        mapping = {d: bool(v) for d, v in dict(y).items()}
    else:
        flags = np.asarray(y)
        if flags.ndim != 1 or len(flags) != len(dates):
            raise InvalidArgumentError(
                f"label array length {flags.shape} does not match {len(dates)} dates"
            )
        mapping = {d: bool(v) for d, v in zip(dates, flags)}
    for d in dates:
        if d not in mapping:
            raise AlignmentError(f"no label for {d.isoformat()}")
    return mapping


def ensure_grid(name: str, values) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise InvalidArgumentError(f"{name} must be non-empty")
    return out
