"""Key frame extraction with temporal segment density peaks clustering,
plus a forward-only LSTM classifier head and multi-stream weight fusion."""

__version__ = "0.1.0"

from .dpc import DecisionGraph, DistanceMatrix, DpcConfig, compute_distances, decision_graph, select_centers
from .errors import DegenerateInputError, DimensionMismatchError, KeyframeError, MalformedInputError
from .features import FeatureMatrix, FrameSequence, export_features, extract_features, import_features
from .fusion import SummaryStats, compression_ratio, compute_fusion_weights, weighted_combine
from .lstm import LstmParams, PredictionMatrix, classify_video, load_params, save_params
from .tsdpc import KeyFrameSet, SegmentSpec, extract_key_frames, segment_video, summarize

__all__ = [
    "DecisionGraph", "DistanceMatrix", "DpcConfig", "compute_distances", "decision_graph",
    "select_centers", "DegenerateInputError", "DimensionMismatchError", "KeyframeError",
    "MalformedInputError", "FeatureMatrix", "FrameSequence", "export_features",
    "extract_features", "import_features", "SummaryStats", "compression_ratio",
    "compute_fusion_weights", "weighted_combine", "LstmParams", "PredictionMatrix",
    "classify_video", "load_params", "save_params", "KeyFrameSet", "SegmentSpec",
    "extract_key_frames", "segment_video", "summarize",
]
