"""Temporal-motif event forecasting.

Ingest a timestamped directed event stream, learn motif-transition and
edge-recurrence statistics in one pass, then generatively forecast the
next k events, export per-event motif-posterior features, and evaluate
forecast precision.
"""

from .evaluate import (
    EvalReport,
    SweepRow,
    default_workers,
    evaluate_run,
    motif_transition_entropy,
    node_entropy,
    precision_at_k,
    repeated_event_ratio,
    report_to_dict,
    sweep_k,
    write_sweep_csv,
)
from .features import (
    ExportError,
    FeatureMatrix,
    build_feature_matrix,
    export_dense,
    export_features,
    export_sparse,
    parse_sparse,
)
from .ingest import (
    EdgeKey,
    Event,
    ParseError,
    StreamSummary,
    TemporalGraph,
    chronological_split,
    load_graph,
    parse_events,
    summary_stats,
    write_events,
)
from .motifs import (
    MotifError,
    MotifInstance,
    MotifType,
    MotifVocabulary,
    OpenMotifPool,
    canonical_type,
    enumerate_types,
    read_vocabulary,
    vocabulary,
    write_vocabulary,
)
from .predictor import (
    Forecast,
    Prediction,
    PredictorState,
    forecast_events,
    init_state,
    run_forecast,
    sample_exponential,
    solve_cold,
    solve_hot,
    write_predictions,
)
from .scoring import (
    IMPOSSIBLE,
    Score,
    cold_log_posterior,
    hot_log_posterior,
    log_waiting_likelihood,
)
from .stats import (
    DegenerateStreamError,
    MtmStats,
    UndefinedIntensityError,
    build_stats,
    compute_delta_c,
    intensity,
    load_stats,
    save_stats,
    scan_stream,
    train_model,
)

__version__ = "0.1.0"

__all__ = [
    "EdgeKey", "Event", "ParseError", "StreamSummary", "TemporalGraph",
    "chronological_split", "load_graph", "parse_events", "summary_stats", "write_events",
    "MotifError", "MotifInstance", "MotifType", "MotifVocabulary", "OpenMotifPool",
    "canonical_type", "enumerate_types", "read_vocabulary", "vocabulary", "write_vocabulary",
    "DegenerateStreamError", "MtmStats", "UndefinedIntensityError", "build_stats",
    "compute_delta_c", "intensity", "load_stats", "save_stats", "scan_stream", "train_model",
    "IMPOSSIBLE", "Score", "cold_log_posterior", "hot_log_posterior", "log_waiting_likelihood",
    "Forecast", "Prediction", "PredictorState", "forecast_events", "init_state",
    "run_forecast", "sample_exponential", "solve_cold", "solve_hot", "write_predictions",
    "ExportError", "FeatureMatrix", "build_feature_matrix", "export_dense",
    "export_features", "export_sparse", "parse_sparse",
    "EvalReport", "SweepRow", "default_workers", "evaluate_run", "motif_transition_entropy",
    "node_entropy", "precision_at_k", "repeated_event_ratio", "report_to_dict",
    "sweep_k", "write_sweep_csv",
    "__version__",
]
