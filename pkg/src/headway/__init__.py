"""Driving-style personalization for adaptive cruise control.

Synthetic car-following trips are cut into steady-following segments,
summarized by three headway features, grouped into three driving styles,
recognized online by per-style fuzzy networks (with a bit-accurate
fixed-point engine model), and finally turned into an individualized,
safety-floored headway setpoint.
"""

from .anfis import (
    AnfisModel,
    BellMF,
    ClassifierBank,
    ConfusionMatrix,
    TrainConfig,
    classify,
    evaluate,
    firing_strengths,
    infer,
    mf_eval,
    train_bank,
    train_hybrid,
)
from .clustering import ClusterModel, KMeansConfig, assign, canonical_order, kmeans_fit
from .config import ArchetypeSpec, CohortConfig, PipelineConfig, config_hash, load_config
from .errors import (
    HeadwayError,
    NumericError,
    ParseError,
    UndefinedFeatureError,
    ValidationError,
)
from .features import (
    FEATURE_NAMES,
    FeatureVector,
    SafetyThreshold,
    Scaler,
    apply_scaler,
    featurize,
    fit_scaler,
    teth,
    thw,
    thw_rms,
    tith,
    ttci,
)
from .fixedpoint import QFormat
from .hw import (
    CycleReport,
    HwAnfis,
    HwFormats,
    MfLut,
    bank_infer,
    divide,
    hw_infer,
    load_hw,
    quantize_inputs,
    quantize_model,
    run_control_sequence,
    save_hw,
    sum_of_products,
)
from .personalization import (
    ClusterStats,
    Observation,
    PlaneModel,
    compute_cluster_stats,
    fit_plane,
    learning_window,
    personalize,
)
from .segmentation import (
    CarFollowingSegment,
    Premises,
    Stretch,
    find_stretches,
    segment_trip,
    uniformize,
)
from .trips import DriverArchetype, Trip, TripSample, generate_trip, load_trip, write_trip

__version__ = "0.1.0"
