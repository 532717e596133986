"""Geosocial keyword recommendation: T-kNGK search plus hierarchical re-ranking."""

from ._kernels import BACKEND_NAME
from .alpha import AlphaParams, CountStats, alpha, count_stats, score_c
from .forest import (
    FeatureVector,
    ForestConfig,
    LabeledExample,
    RandomForestModel,
    derive_label,
    evaluate,
    extract_features,
    predict,
    split_train_test,
    train,
)
from .graph import EdgeKind, GeoPoint, GeosocialGraph, SpStats, load_snapshot, save_snapshot
from .pipeline import AlphaScope, Recommendation, optimize
from .query import Candidate, Query, edge_cost, haversine_m, is_eligible, tkngk

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "AlphaParams",
    "AlphaScope",
    "Candidate",
    "CountStats",
    "EdgeKind",
    "FeatureVector",
    "ForestConfig",
    "GeoPoint",
    "GeosocialGraph",
    "LabeledExample",
    "Query",
    "RandomForestModel",
    "Recommendation",
    "SpStats",
    "alpha",
    "count_stats",
    "derive_label",
    "edge_cost",
    "evaluate",
    "extract_features",
    "haversine_m",
    "is_eligible",
    "load_snapshot",
    "optimize",
    "predict",
    "save_snapshot",
    "score_c",
    "split_train_test",
    "tkngk",
    "train",
]
