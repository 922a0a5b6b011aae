"""Partition quality measurement: modularity, sizes, disconnected communities."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import CsrGraph
from .leiden import renumber_communities
from .parallel import WorkerPool

__all__ = [
    "CommunityAggregates",
    "AuditReport",
    "community_aggregates",
    "modularity",
    "community_sizes",
    "disconnected_communities",
    "bfs_visit_for_each",
    "audit",
]


@dataclass(frozen=True)
class CommunityAggregates:
    """Per-community weight sums used by the modularity formula.

    ``sigma_in[c]`` counts intra-community arcs as stored (both directions
    for distinct endpoints, once for self-loops); ``sigma_tot[c]`` is the
    community's total arc weight.  With everything in one community,
    ``sigma_in == sigma_tot == total_weight``.
    """

    sigma_in: np.ndarray
    sigma_tot: np.ndarray


def community_aggregates(g: CsrGraph, membership: np.ndarray,
                         num_communities: int | None = None,
                         pool: WorkerPool | None = None) -> CommunityAggregates:
    if num_communities is None:
        num_communities = int(membership.max()) + 1 if membership.size else 0
    intra = np.zeros(g.num_vertices, dtype=np.float64)
    counter = np.zeros(1, dtype=np.int64)
    if pool is None or pool.threads == 1:
        kernels.intra_weight_partials(
            g.offsets, g.edges, g.weights, membership, intra, counter,
            kernels.DEFAULT_CHUNK,
        )
    else:
        pool.run(
            lambda t: kernels.intra_weight_partials(
                g.offsets, g.edges, g.weights, membership, intra, counter,
                kernels.DEFAULT_CHUNK,
            )
        )
    k = np.zeros(g.num_vertices, dtype=np.float64)
    counter[0] = 0
    if pool is None or pool.threads == 1:
        kernels.fill_vertex_weights(g.offsets, g.weights, k, counter,
                                    kernels.DEFAULT_CHUNK)
    else:
        pool.run(
            lambda t: kernels.fill_vertex_weights(
                g.offsets, g.weights, k, counter, kernels.DEFAULT_CHUNK
            )
        )
    # the per-vertex partials are order-fixed, so these reductions are
    # identical whatever the thread count
    sigma_in = np.bincount(membership, weights=intra, minlength=num_communities)
    sigma_tot = np.bincount(membership, weights=k, minlength=num_communities)
    return CommunityAggregates(sigma_in=sigma_in, sigma_tot=sigma_tot)


def modularity(g: CsrGraph, membership: np.ndarray,
               pool: WorkerPool | None = None) -> float:
    """Partition quality in [-0.5, 1]: intra-community weight fraction minus
    the expectation under random wiring.

    Raises ``ValueError`` on a graph with zero total weight, where the
    value is undefined.
    """
    if g.total_weight <= 0.0:
        raise ValueError("modularity is undefined for zero total edge weight")
    membership = np.asarray(membership)
    agg = community_aggregates(g, membership, pool=pool)
    two_m = g.total_weight
    frac = agg.sigma_tot / two_m
    return float(np.sum(agg.sigma_in / two_m - frac * frac))


def community_sizes(membership: np.ndarray,
                    num_communities: int | None = None,
                    threads: int = 1) -> np.ndarray:
    """Vertex count per community id (ids must be dense)."""
    membership = np.asarray(membership)
    if num_communities is None:
        num_communities = int(membership.max()) + 1 if membership.size else 0
    sizes = np.zeros(num_communities, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    with WorkerPool(threads) as pool:
        pool.run(
            lambda t: kernels.count_by_community(
                membership, sizes, counter, kernels.DEFAULT_CHUNK
            )
        )
    return sizes


def bfs_visit_for_each(visited: np.ndarray, g: CsrGraph, start: int,
                       f_if, f_do) -> None:
    """Breadth-first traversal from ``start`` over vertices passing ``f_if``.

    ``f_do`` fires exactly once per visited vertex, including ``start``.
    A vertex is enqueued only when its visited flag was clear and
    ``f_if(vertex)`` holds; flags are set as vertices are discovered.
    """
    queue = deque([start])
    visited[start] = 1
    while queue:
        u = queue.popleft()
        f_do(u)
        dsts, _ = g.row(u)
        for j in dsts:
            j = int(j)
            if not visited[j] and f_if(j):
                visited[j] = 1
                queue.append(j)


def disconnected_communities(g: CsrGraph, membership: np.ndarray,
                             threads: int = 1) -> np.ndarray:
    """Flag communities whose induced subgraph is not connected.

    Communities are partitioned across workers in interleaved chunks of
    ``BFS_CHUNK`` ids; each worker BFS-covers its communities from the
    first member in global vertex order, so the output is identical for
    every thread count.  Size-0 and size-1 communities are never flagged.
    """
    membership = np.asarray(membership)
    num_communities = int(membership.max()) + 1 if membership.size else 0
    sizes = community_sizes(membership, num_communities, threads=threads)
    size_work = sizes.copy()
    flags = np.zeros(num_communities, dtype=np.uint8)
    visited = np.zeros(g.num_vertices, dtype=np.uint8)
    queues = [np.empty(g.num_vertices, dtype=np.int64) for _ in range(threads)]
    with WorkerPool(threads) as pool:
        pool.run(
            lambda t: kernels.bfs_audit(
                g.offsets, g.edges, membership, size_work, flags, visited,
                queues[t], t, threads, kernels.BFS_CHUNK,
            )
        )
    return flags


@dataclass
class AuditReport:
    """Community sizes, disconnection flags, and modularity for a partition."""

    sizes: np.ndarray
    disconnected: np.ndarray
    num_disconnected: int
    modularity: float | None
    disconnected_fraction: float

    @property
    def num_communities(self) -> int:
        return int(self.sizes.size)


def audit(g: CsrGraph, membership: np.ndarray, threads: int = 1) -> AuditReport:
    """Renumber the membership and measure the partition.

    ``modularity`` is None for graphs with zero total weight, where the
    metric is undefined.
    """
    dense, num_communities = renumber_communities(np.asarray(membership))
    sizes = community_sizes(dense, num_communities, threads=threads)
    flags = disconnected_communities(g, dense, threads=threads)
    num_disconnected = int(flags.sum())
    try:
        q = modularity(g, dense)
    except ValueError:
        q = None
    fraction = num_disconnected / num_communities if num_communities else 0.0
    return AuditReport(
        sizes=sizes,
        disconnected=flags,
        num_disconnected=num_disconnected,
        modularity=q,
        disconnected_fraction=fraction,
    )
