"""Atmospheric-blocking detection, tracking and ensemble summaries."""

from .calendars import (
    FIXED360,
    GREGORIAN,
    Calendar,
    Date,
    Fixed360,
    Gregorian365,
    calendar_by_name,
    date_range,
    month_day_valid,
    parse_date,
)
from .climatology import (
    SeasonalCycle,
    anomaly,
    build_seasonal_cycle,
    detrend_linear,
    fourier_smooth,
    long_term_daily_mean,
    normalize,
    smooth_cycle,
)
from .detection import (
    BlockingLabels,
    Component,
    TrajectoryGraph,
    boundary_mask,
    build_trajectory_graph,
    cell_overlap,
    detect,
    extract_all_components,
    extract_components,
    label_blocking,
    weighted_overlap,
)
from .dg83 import (
    DG83Config,
    DisagreementCounts,
    DisagreementRow,
    dg83_detect,
    dg83_threshold,
    disagreement_table,
)
from .errors import (
    AlignmentError,
    BlocktrackError,
    CalendarError,
    CorruptInputError,
    EmptyDomainError,
    InsufficientDataError,
    InsufficientEnsembleError,
    InvalidArgumentError,
    MalformedHeaderError,
    ShapeError,
)
from .estimators import (
    BlockingDetector,
    BlockingGridSearchCV,
    ClimatologyNormalizer,
    DG83Detector,
)
from .evaluation import (
    BreakdownRow,
    DateWindow,
    EvalReport,
    TemporalBreakdown,
    monthly_agreement,
    score,
    temporal_breakdown,
    write_breakdown_csv,
    write_disagreement_csv,
    write_monthly_csv,
    write_report_csv,
)
from .grid import (
    DailyFieldSeries,
    LatLonGrid,
    block_average,
    crop_domain,
    latitude_weight,
)
from .io_formats import (
    FORMAT_VERSION,
    boxplot_features,
    file_crc32,
    read_cycle,
    read_footprints_json,
    read_labels_csv,
    read_series,
    stack_median_features,
    write_contours_geojson,
    write_cycle,
    write_footprints_json,
    write_frequency_csv,
    write_geojson,
    write_labels_csv,
    write_manifest,
    write_series,
    write_volume_vti,
)
from .tracing import corner_axes, rings_lonlat, trace_rings
from .tuning import TuneResult, TuneRow, tune, tuning_years, write_surface_csv
from .uncertainty import (
    DEFAULT_EPSILON_GRID,
    ContourBoxplot,
    ContourEnsemble,
    EnsembleMember,
    FrequencyMap,
    MismatchMatrix,
    TemporalStack,
    band,
    build_stacks,
    contour_boxplot,
    contour_ensemble,
    frequency_map,
    mismatch,
    mismatch_matrix,
    region_boundary,
    relaxed_depth,
    select_epsilon,
)
from .validation import ensure_grid, ensure_label_map, ensure_series

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BlockingDetector",
    "BlockingGridSearchCV",
    "BlockingLabels",
    "BlocktrackError",
    "BreakdownRow",
    "Calendar",
    "CalendarError",
    "ClimatologyNormalizer",
    "Component",
    "ContourBoxplot",
    "ContourEnsemble",
    "CorruptInputError",
    "DEFAULT_EPSILON_GRID",
    "DG83Config",
    "DG83Detector",
    "DailyFieldSeries",
    "Date",
    "DateWindow",
    "DisagreementCounts",
    "DisagreementRow",
    "EmptyDomainError",
    "EnsembleMember",
    "EvalReport",
    "FIXED360",
    "FORMAT_VERSION",
    "Fixed360",
    "FrequencyMap",
    "GREGORIAN",
    "Gregorian365",
    "InsufficientDataError",
    "InsufficientEnsembleError",
    "InvalidArgumentError",
    "LatLonGrid",
    "MalformedHeaderError",
    "MismatchMatrix",
    "SeasonalCycle",
    "ShapeError",
    "TemporalBreakdown",
    "TemporalStack",
    "TrajectoryGraph",
    "TuneResult",
    "TuneRow",
    "anomaly",
    "band",
    "block_average",
    "boundary_mask",
    "boxplot_features",
    "build_seasonal_cycle",
    "build_stacks",
    "build_trajectory_graph",
    "calendar_by_name",
    "cell_overlap",
    "contour_boxplot",
    "contour_ensemble",
    "corner_axes",
    "crop_domain",
    "date_range",
    "detect",
    "detrend_linear",
    "dg83_detect",
    "dg83_threshold",
    "disagreement_table",
    "ensure_grid",
    "ensure_label_map",
    "ensure_series",
    "extract_all_components",
    "extract_components",
    "file_crc32",
    "fourier_smooth",
    "frequency_map",
    "label_blocking",
    "latitude_weight",
    "long_term_daily_mean",
    "mismatch",
    "mismatch_matrix",
    "month_day_valid",
    "monthly_agreement",
    "normalize",
    "parse_date",
    "read_cycle",
    "read_footprints_json",
    "read_labels_csv",
    "read_series",
    "region_boundary",
    "relaxed_depth",
    "rings_lonlat",
    "score",
    "select_epsilon",
    "smooth_cycle",
    "stack_median_features",
    "temporal_breakdown",
    "trace_rings",
    "tune",
    "tuning_years",
    "weighted_overlap",
    "write_breakdown_csv",
    "write_contours_geojson",
    "write_cycle",
    "write_disagreement_csv",
    "write_footprints_json",
    "write_frequency_csv",
    "write_geojson",
    "write_labels_csv",
    "write_manifest",
    "write_monthly_csv",
    "write_report_csv",
    "write_series",
    "write_surface_csv",
    "write_volume_vti",
]
