"""Isovist metrics for voxel (block) worlds.

Compute per-position visibility metrics, sweep whole maps with seeded
subsampling, export top-down heatmaps and rank-correlate per-map means
against rating tables.
"""
__version__ = "0.1.0"

from .geometry import SphereShell, bresenham3d, radial_stats, sphere_shell
from .isovist import (
    METRIC_NAMES,
    IsovistMetrics,
    IsovistSets,
    NotAHeadspaceError,
    compute_isovist,
    derive_metrics,
    drift,
    isovist_metrics,
    visible,
)
from .reachability import ReachSet, floodfill_reach
from .stats import RatingTable, correlation_matrix, spearman_pvalue, spearman_rho
from .survey import (
    HeatmapGrid,
    MetricsTable,
    SweepConfig,
    aggregate_map,
    build_heatmap,
    sample_centroids,
    sweep,
)
from .world import (
    BlockClasses,
    BlockPos,
    VoxelWorld,
    block_at,
    default_block_classes,
    enumerate_headspaces,
    load_block_classes,
    load_world,
    save_world,
)

__all__ = [
    "SphereShell", "bresenham3d", "radial_stats", "sphere_shell",
    "METRIC_NAMES", "IsovistMetrics", "IsovistSets", "NotAHeadspaceError",
    "compute_isovist", "derive_metrics", "drift", "isovist_metrics", "visible",
    "ReachSet", "floodfill_reach",
    "RatingTable", "correlation_matrix", "spearman_pvalue", "spearman_rho",
    "HeatmapGrid", "MetricsTable", "SweepConfig", "aggregate_map", "build_heatmap",
    "sample_centroids", "sweep",
    "BlockClasses", "BlockPos", "VoxelWorld", "block_at", "default_block_classes",
    "enumerate_headspaces", "load_block_classes", "load_world", "save_world",
]
