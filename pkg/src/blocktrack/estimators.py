"""Estimator layer: the pipeline stages as scikit-learn components.

``ClimatologyNormalizer`` is a transformer from raw height series to
normalized anomaly series; the detectors are predictors returning
per-date boolean labels; ``BlockingGridSearchCV`` wraps the tuning
search. All accept and return ``DailyFieldSeries`` rather than bare
arrays, so they compose with each other, not with generic sklearn
pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .climatology import anomaly, build_seasonal_cycle, detrend_linear, normalize
from .detection import detect
from .dg83 import DG83Config, dg83_detect
from .grid import DailyFieldSeries
from .tuning import tune
from .validation import ensure_grid, ensure_label_map, ensure_series


class ClimatologyNormalizer(TransformerMixin, BaseEstimator):
    """Raw heights -> smoothed-climatology anomalies in threshold units.

    ``fit`` learns the per-cell seasonal cycle (harmonic-smoothed daily
    mean and spread); ``transform`` subtracts the smoothed mean,
    optionally removes a pooled linear trend, and divides by the
    floored smoothed spread.
    """

    def __init__(self, n_harmonics: int = 6, floor: float = 100.0,
                 detrend: bool = True):
        self.n_harmonics = n_harmonics
        self.floor = floor
        self.detrend = detrend

    def fit(self, X, y=None):
        X = ensure_series(X)
        self.cycle_ = build_seasonal_cycle(X, n_harmonics=self.n_harmonics)
        return self

    def transform(self, X) -> DailyFieldSeries:
        check_is_fitted(self, "cycle_")
        X = ensure_series(X)
        out = anomaly(X, self.cycle_)
        if self.detrend:
            out = detrend_linear(out)
        return normalize(out, self.cycle_, floor=self.floor)

    def anomalies(self, X) -> DailyFieldSeries:
        """Meter-unit anomalies (smoothed mean removed, optional detrend),
        the input expected by the reference-index detector."""
        check_is_fitted(self, "cycle_")
        X = ensure_series(X)
        out = anomaly(X, self.cycle_)
        if self.detrend:
            out = detrend_linear(out)
        return out


class BlockingDetector(BaseEstimator):
    """Persistent-overlap detector on normalized series.

    Stateless: ``fit`` records nothing beyond marking the estimator
    usable, so the same instance can label any number of series.
    """

    def __init__(self, level: float = 1.2, min_overlap: float = 31.0,
                 min_days: int = 5, connectivity: int = 4, threads: int = 1):
        self.level = level
        self.min_overlap = min_overlap
        self.min_days = min_days
        self.connectivity = connectivity
        self.threads = threads

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def detect(self, X):
        """(labels, trajectory graph) for a normalized series."""
        X = ensure_series(X)
        return detect(
            X, self.level, self.min_overlap,
            min_days=self.min_days, connectivity=self.connectivity,
            threads=self.threads,
        )

    def predict(self, X) -> np.ndarray:
        labels, _ = self.detect(X)
        return np.asarray(labels.blocked, dtype=bool)


class DG83Detector(BaseEstimator):
    """Reference absolute-threshold detector, raw heights in.

    ``fit`` learns the seasonal cycle from the raw series; ``predict``
    forms meter anomalies with the same preprocessing as the main
    pipeline and applies the fixed-threshold index.
    """

    def __init__(self, sigma_multiplier: float = 1.5, floor: float = 100.0,
                 min_days: int = 5, min_overlap_cells: int = 1,
                 connectivity: int = 4, latitude_rescaling: bool = False,
                 n_harmonics: int = 6, detrend: bool = True, threads: int = 1):
        self.sigma_multiplier = sigma_multiplier
        self.floor = floor
        self.min_days = min_days
        self.min_overlap_cells = min_overlap_cells
        self.connectivity = connectivity
        self.latitude_rescaling = latitude_rescaling
        self.n_harmonics = n_harmonics
        self.detrend = detrend
        self.threads = threads

    def fit(self, X, y=None):
        X = ensure_series(X)
        self.cycle_ = build_seasonal_cycle(X, n_harmonics=self.n_harmonics)
        return self

    def _config(self) -> DG83Config:
        return DG83Config(
            sigma_multiplier=self.sigma_multiplier,
            floor=self.floor,
            min_days=self.min_days,
            min_overlap_cells=self.min_overlap_cells,
            connectivity=self.connectivity,
            latitude_rescaling=self.latitude_rescaling,
        )

    def detect(self, X):
        check_is_fitted(self, "cycle_")
        X = ensure_series(X)
        anom = anomaly(X, self.cycle_)
        if self.detrend:
            anom = detrend_linear(anom)
        return dg83_detect(anom, self.cycle_, self._config(), threads=self.threads)

    def predict(self, X) -> np.ndarray:
        labels, _ = self.detect(X)
        return np.asarray(labels.blocked, dtype=bool)


class BlockingGridSearchCV(BaseEstimator):
    """Cross-validated (threshold, overlap) search in sklearn clothing.

    ``fit(X, y)`` takes a normalized series and per-date truth (mapping
    or aligned boolean array) and exposes ``best_params_``,
    ``best_score_`` and a ``cv_results_`` table; ``predict`` labels with
    the winning detector.
    """

    def __init__(self, level_grid=(1.2,), overlap_grid=(31.0,),
                 n_folds: int = 5, min_days: int = 5, connectivity: int = 4,
                 objective: str = "f1", threads: int = 1):
        self.level_grid = level_grid
        self.overlap_grid = overlap_grid
        self.n_folds = n_folds
        self.min_days = min_days
        self.connectivity = connectivity
        self.objective = objective
        self.threads = threads

    def fit(self, X, y):
        X = ensure_series(X)
        truth = ensure_label_map(y, X.dates)
        result = tune(
            X, truth,
            ensure_grid("level_grid", self.level_grid),
            ensure_grid("overlap_grid", self.overlap_grid),
            n_folds=self.n_folds, min_days=self.min_days,
            connectivity=self.connectivity, objective=self.objective,
            threads=self.threads,
        )
        self.tune_result_ = result
        self.best_params_ = {
            "level": result.best_level,
            "min_overlap": result.best_min_overlap,
        }
        self.best_score_ = result.best_score
        n_folds = len(result.fold_years)
        table: dict[str, list] = {
            "param_level": [r.level for r in result.rows],
            "param_min_overlap": [r.min_overlap for r in result.rows],
            "mean_test_score": [r.mean_score for r in result.rows],
        }
        for i in range(n_folds):
            table[f"split{i}_test_score"] = [r.fold_scores[i] for r in result.rows]
        order = sorted(
            range(len(result.rows)),
            key=lambda i: (-result.rows[i].mean_score,
                           result.rows[i].level, result.rows[i].min_overlap),
        )
        ranks = [0] * len(order)
        for rank, i in enumerate(order, start=1):
            ranks[i] = rank
        table["rank_test_score"] = ranks
        self.cv_results_ = table
        self.best_estimator_ = BlockingDetector(
            level=result.best_level, min_overlap=result.best_min_overlap,
            min_days=self.min_days, connectivity=self.connectivity,
            threads=self.threads,
        ).fit()
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "best_estimator_")
        return self.best_estimator_.predict(X)
