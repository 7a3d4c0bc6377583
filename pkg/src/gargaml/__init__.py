"""Smurfing-risk scores from second-order-neighbourhood block densities."""

from .community import CommunityPartition, louvain, modularity, prune_inter_community
from .graph import Graph, Neighbourhood, build_graph, second_order_neighbourhood, undirected_view
from .metrics import MetricSet, compute_metrics
from .scoring import (GargAmlScore, assign_levels, run_garg_aml, score_all, score_directed,
                      score_undirected)
from .stats import RankReport, rank_methods
from .synthgen import GenSpec, full_grid, generate_dataset, inject_pattern

__version__ = "0.1.0"

__all__ = [
    "CommunityPartition",
    "GargAmlScore",
    "GenSpec",
    "Graph",
    "MetricSet",
    "Neighbourhood",
    "RankReport",
    "assign_levels",
    "build_graph",
    "compute_metrics",
    "full_grid",
    "generate_dataset",
    "inject_pattern",
    "louvain",
    "modularity",
    "prune_inter_community",
    "rank_methods",
    "run_garg_aml",
    "score_all",
    "score_directed",
    "score_undirected",
    "second_order_neighbourhood",
    "undirected_view",
]
