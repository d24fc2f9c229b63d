"""CSAC-vs-GPS-time drift modeling with signal-quality weighted holdover.

The package simulates (or ingests) clock-offset measurement series tagged
with per-epoch GPS quality (visible-satellite count, TDOP), quantifies how
that quality moves measurement noise, and fits quality-weighted polynomial
drift models whose coasting accuracy is scored over a withheld horizon.
"""

from .errors import (
    AlignmentError,
    BoundsError,
    CadenceError,
    ConfigError,
    DegenerateGeometryError,
    FitError,
    FormatError,
    HoldoverError,
    InsufficientDataError,
    MetadataError,
    OrderingError,
    ValidationError,
    ZeroWeightError,
)
from .geometry import (
    Constellation,
    DopSet,
    DopTimeline,
    OrbitalElement,
    ReceiverPos,
    SkyState,
    constellation_from_json,
    dop_from_los,
    dop_timeline,
    nominal_gps_constellation,
    satellite_ecef,
    sky_state,
)
from .models import (
    CoastReport,
    DriftModel,
    ModelScore,
    WeightScheme,
    coast_rmse,
    fit,
    model_select,
    predict,
    weights_for,
)
from .quality import (
    QualityBin,
    QualityBinSpec,
    QualityReport,
    noise_variance,
    pairwise_noise_series,
    stratified_quality,
)
from .simulator import (
    ClockSpec,
    Scenario,
    preset_scenarios,
    replicate,
    simulate_clock_truth,
    simulate_dataset,
    sky_for_scenario,
)
from .timeseries import (
    Epoch,
    MeasurementSeries,
    Sample,
    emit_series,
    parse_series,
    split_at,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BoundsError",
    "CadenceError",
    "ClockSpec",
    "CoastReport",
    "ConfigError",
    "Constellation",
    "DegenerateGeometryError",
    "DopSet",
    "DopTimeline",
    "DriftModel",
    "Epoch",
    "FitError",
    "FormatError",
    "HoldoverError",
    "InsufficientDataError",
    "MeasurementSeries",
    "MetadataError",
    "ModelScore",
    "OrbitalElement",
    "OrderingError",
    "QualityBin",
    "QualityBinSpec",
    "QualityReport",
    "ReceiverPos",
    "Sample",
    "Scenario",
    "SkyState",
    "ValidationError",
    "WeightScheme",
    "ZeroWeightError",
    "coast_rmse",
    "constellation_from_json",
    "dop_from_los",
    "dop_timeline",
    "emit_series",
    "fit",
    "model_select",
    "noise_variance",
    "nominal_gps_constellation",
    "pairwise_noise_series",
    "parse_series",
    "predict",
    "preset_scenarios",
    "replicate",
    "satellite_ecef",
    "simulate_clock_truth",
    "simulate_dataset",
    "sky_for_scenario",
    "sky_state",
    "split_at",
    "stratified_quality",
    "weights_for",
]
