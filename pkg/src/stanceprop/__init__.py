"""Graph-based semi-supervised stance classification for rumour messages."""

from .data import Message, Rumour, filter_rumours, load_jsonl, load_pheme, resolve_stance
from .features import BrownClusterMap, FeatureMatrix, Lexicons, featurize
from .metrics import MetricSet, benchmark_scores, compute_metrics
from .pipeline import PipelineSettings, RumourClassifier
from .preprocess import TokenizedMessage, preprocess
from .propagation import (
    AffinityMatrix,
    LabelDistribution,
    PropagationConfig,
    assign_classes,
    build_knn_affinity,
    build_rbf_affinity,
    degree_matrix,
    normalized_laplacian,
    propagation_cost,
    run_propagation,
    seed_distribution,
)
from .sigma import LabeledPointSet, heuristic_sigma

__version__ = "0.1.0"

__all__ = [
    "AffinityMatrix",
    "BrownClusterMap",
    "FeatureMatrix",
    "LabelDistribution",
    "LabeledPointSet",
    "Lexicons",
    "Message",
    "MetricSet",
    "PipelineSettings",
    "PropagationConfig",
    "Rumour",
    "RumourClassifier",
    "TokenizedMessage",
    "assign_classes",
    "benchmark_scores",
    "build_knn_affinity",
    "build_rbf_affinity",
    "compute_metrics",
    "degree_matrix",
    "featurize",
    "filter_rumours",
    "heuristic_sigma",
    "load_jsonl",
    "load_pheme",
    "normalized_laplacian",
    "preprocess",
    "propagation_cost",
    "resolve_stance",
    "run_propagation",
    "seed_distribution",
]
