"""Multithreaded Leiden community detection on CSR graphs."""

from .graph import (
    CsrGraph,
    HoleyCsrBuilder,
    csr_from_arcs,
    csr_from_undirected,
    exclusive_scan,
    vertex_weights,
)
from .io import (
    GraphLoadError,
    load_edge_list,
    load_graph,
    load_matrix_market,
    read_membership,
    write_membership,
)
from .leiden import (
    LabelStrategy,
    LeidenConfig,
    LeidenResult,
    PassState,
    RefineStrategy,
    ThreadAccumulator,
    claim_isolated,
    community_total_degree,
    count_community_vertices,
    delta_modularity,
    leiden,
    leiden_aggregate,
    leiden_move,
    leiden_refine,
    lookup_dendrogram,
    renumber_communities,
    scan_bounded,
    scan_communities,
)
from .audit import (
    AuditReport,
    CommunityAggregates,
    audit,
    bfs_visit_for_each,
    community_aggregates,
    community_sizes,
    disconnected_communities,
    modularity,
)
from .rng import Xorshift32
from .synth import random_graph

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "CommunityAggregates",
    "CsrGraph",
    "GraphLoadError",
    "HoleyCsrBuilder",
    "LabelStrategy",
    "LeidenConfig",
    "LeidenResult",
    "PassState",
    "RefineStrategy",
    "ThreadAccumulator",
    "Xorshift32",
    "audit",
    "bfs_visit_for_each",
    "claim_isolated",
    "community_aggregates",
    "community_sizes",
    "community_total_degree",
    "count_community_vertices",
    "csr_from_arcs",
    "csr_from_undirected",
    "delta_modularity",
    "disconnected_communities",
    "exclusive_scan",
    "leiden",
    "leiden_aggregate",
    "leiden_move",
    "leiden_refine",
    "load_edge_list",
    "load_graph",
    "load_matrix_market",
    "lookup_dendrogram",
    "modularity",
    "random_graph",
    "read_membership",
    "renumber_communities",
    "scan_bounded",
    "scan_communities",
    "vertex_weights",
    "write_membership",
]
