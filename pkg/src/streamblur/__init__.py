"""Streaming face anonymization: incremental clustering of face detections,
trajectory gap refinement, and irreversible masking."""

from .affinity import (ClusterConfig, ClusterState, DegenerateEmbeddingError,
                       StateError, ap_batch, build_similarity, compact_state,
                       piap_step, positioned_similarity)
from .blur import AppliedMask, apply_masks, plan_masks, read_mask_log, write_mask_log
from .core import (BoundingBox, Detection, OrderingError, ParseError,
                   SchemaError, StreamFormatError, StreamHeader, parse_stream,
                   segment_stream, write_stream)
from .gp import GPParams, chi2_quantile, fit, predict, wilks_accept, wilks_statistic
from .metrics import GroundTruthBox, evaluate_masks, iou, weighted_cluster_purity
from .pipeline import (PipelineConfig, PipelineResult, StreamClusterer, run,
                       write_artifacts)
from .refine import refine_trajectory
from .synth import SceneConfig, generate
from .tracks import (Sample, Trajectory, assemble, prune_unstable,
                     read_trajectories, write_trajectories)

__version__ = "0.1.0"

__all__ = [
    "AppliedMask", "BoundingBox", "ClusterConfig", "ClusterState",
    "DegenerateEmbeddingError", "Detection", "GPParams", "GroundTruthBox",
    "OrderingError", "ParseError", "PipelineConfig", "PipelineResult",
    "Sample", "SceneConfig", "SchemaError", "StateError", "StreamClusterer",
    "StreamFormatError", "StreamHeader", "Trajectory", "ap_batch",
    "apply_masks", "assemble", "build_similarity", "chi2_quantile",
    "compact_state", "evaluate_masks", "fit", "generate", "iou",
    "parse_stream", "piap_step", "plan_masks", "positioned_similarity",
    "predict", "prune_unstable", "read_mask_log", "read_trajectories",
    "refine_trajectory", "run", "segment_stream",
    "weighted_cluster_purity", "wilks_accept", "wilks_statistic",
    "write_artifacts", "write_mask_log", "write_stream",
    "write_trajectories",
]
