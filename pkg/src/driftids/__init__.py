"""Streaming packet anomaly detection with drift adaptation and
decision-tree explanations."""

from .autoencoder import DenoisingAutoencoder, minmax_normalize
from .drift import (
    DriftAdapter,
    DriftDecision,
    LabeledChunk,
    UpdateIndexParams,
    build_pool,
    compute_update_index,
    default_grid,
    select_hyperparameters,
)
from .explain import TreeExplainer, TrustReport, feature_usage, fidelity
from .features import (
    FEATURE_COUNT,
    FEATURE_NAMES,
    LAMBDAS,
    PacketFeatureExtractor,
    feature_names,
    schema_text,
    write_features_csv,
)
from .metrics import Confusion, confusion, prf1, render_metrics_table, throughput
from .packets import (
    PacketRecord,
    Protocol,
    format_csv,
    load_packets,
    parse_csv,
    parse_pcap,
    write_csv,
    write_pcap,
)
from .synth import AttackSpec, DriftEventSpec, FlowSpec, ScenarioSpec, generate, preset
from .tree import DecisionTree, fit_tree, render_tree, top_k_prune

__version__ = "0.1.0"

__all__ = [
    "AttackSpec",
    "Confusion",
    "DecisionTree",
    "DenoisingAutoencoder",
    "DriftAdapter",
    "DriftDecision",
    "DriftEventSpec",
    "FEATURE_COUNT",
    "FEATURE_NAMES",
    "FlowSpec",
    "LabeledChunk",
    "LAMBDAS",
    "PacketFeatureExtractor",
    "PacketRecord",
    "Protocol",
    "ScenarioSpec",
    "TreeExplainer",
    "TrustReport",
    "UpdateIndexParams",
    "build_pool",
    "compute_update_index",
    "confusion",
    "default_grid",
    "feature_names",
    "feature_usage",
    "fidelity",
    "fit_tree",
    "format_csv",
    "generate",
    "load_packets",
    "minmax_normalize",
    "parse_csv",
    "parse_pcap",
    "preset",
    "prf1",
    "render_metrics_table",
    "render_tree",
    "schema_text",
    "select_hyperparameters",
    "throughput",
    "top_k_prune",
    "write_csv",
    "write_features_csv",
    "write_pcap",
]
