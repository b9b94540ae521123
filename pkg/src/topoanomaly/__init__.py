"""Topology anomaly detection from the network path change coefficient (NPCC)."""

__version__ = "0.1.0"

from .detector import DetectorConfig, DetectorState, Label, TauMode, classify, run_stream
from .graph import SnapshotGraph, bfs_distances, build_graph, largest_component
from .metrics import SnapshotMetrics, npcc, snapshot_metrics, snapshot_metrics_sampled

__all__ = [
    "DetectorConfig",
    "DetectorState",
    "Label",
    "SnapshotGraph",
    "SnapshotMetrics",
    "TauMode",
    "bfs_distances",
    "build_graph",
    "classify",
    "largest_component",
    "npcc",
    "run_stream",
    "snapshot_metrics",
    "snapshot_metrics_sampled",
]
