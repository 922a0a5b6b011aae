"""Seeded random graph fixture for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .graph import CsrGraph, csr_from_undirected

__all__ = ["random_graph"]


def random_graph(n: int, avg_degree: float, seed: int, *,
                 weighted: bool = False, blocks: int = 0,
                 intra_fraction: float = 0.8) -> CsrGraph:
    """Seeded undirected random graph with roughly ``n * avg_degree / 2`` edges.

    With ``blocks > 1``, vertices are split into contiguous equal blocks
    and ``intra_fraction`` of the sampled edges stay inside their block,
    planting community structure.  Self-loops are dropped and duplicate
    pairs merge, so the realized degree is slightly below the target.
    Weighted graphs draw weights uniformly from (0, 1].
    """
    if n <= 0:
        return csr_from_undirected(0, [], [], [])
    rng = np.random.default_rng(seed)
    num_edges = max(0, int(round(n * avg_degree / 2)))
    src = rng.integers(0, n, size=num_edges, dtype=np.int64)
    dst = rng.integers(0, n, size=num_edges, dtype=np.int64)
    if blocks > 1:
        block_size = max(1, n // blocks)
        intra = rng.random(num_edges) < intra_fraction
        base = (src // block_size) * block_size
        width = np.minimum(base + block_size, n) - base
        dst = np.where(intra, base + rng.integers(0, block_size, size=num_edges) % width, dst)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    weights = 1.0 - rng.random(src.size) if weighted else None
    return csr_from_undirected(n, src, dst, weights)
