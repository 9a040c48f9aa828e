"""Agglomerative clustering by average-silhouette-width merges, with baselines,
validation metrics and synthetic cluster models."""

from .distance import DistanceMatrix, Metric, load_distance_matrix, pairwise_distances
from .silhouette import ClusterCache, SilhouetteReport, build_cache, silhouette_report
from .engine import Hierarchy, MergeRecord, best_k, hosil, to_dendrogram
from .baselines import asw_sweep, kmeans, linkage_cluster, pam, pamsil
from .validation import ari, run_experiment, ExperimentSpec
from .datagen import DgpSpec, generate

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix", "Metric", "load_distance_matrix", "pairwise_distances",
    "ClusterCache", "SilhouetteReport", "build_cache", "silhouette_report",
    "Hierarchy", "MergeRecord", "best_k", "hosil", "to_dendrogram",
    "asw_sweep", "kmeans", "linkage_cluster", "pam", "pamsil",
    "ari", "run_experiment", "ExperimentSpec", "DgpSpec", "generate",
]
