"""CSR graph types and the array primitives every phase builds on."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VERTEX_DTYPE = np.int32
OFFSET_DTYPE = np.int64
WEIGHT_DTYPE = np.float64

__all__ = [
    "CsrGraph",
    "HoleyCsrBuilder",
    "csr_from_arcs",
    "csr_from_undirected",
    "exclusive_scan",
    "offsets_from_counts",
    "vertex_weights",
]


@dataclass(frozen=True)
class CsrGraph:
    """Immutable weighted undirected graph in compressed sparse row form.

    Every undirected edge {i, j} with i != j is materialised as both arcs
    i->j and j->i with the same weight; a self-loop is stored exactly once
    in its row.  ``total_weight`` caches the sum of all stored weights
    (conventionally 2m); a self-loop therefore contributes its weight once.

    Arrays are marked read-only: the graph is safe to share across threads.
    """

    num_vertices: int
    offsets: np.ndarray   # int64[N+1], non-decreasing, offsets[0] == 0
    edges: np.ndarray     # int32[M] arc destinations
    weights: np.ndarray   # float64[M] non-negative arc weights
    total_weight: float   # sum(weights) == 2m

    def __post_init__(self):
        for arr in (self.offsets, self.edges, self.weights):
            arr.setflags(write=False)

    @property
    def num_arcs(self) -> int:
        return int(self.edges.size)

    def degree(self, i: int) -> int:
        return int(self.offsets[i + 1] - self.offsets[i])

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Destinations and weights of vertex ``i``'s arcs (read-only views)."""
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return self.edges[lo:hi], self.weights[lo:hi]

    def validate(self, rel_tol: float = 1e-9) -> None:
        """Check the CSR invariants; raises ``ValueError`` on violation.

        Intended for tests and loaders, not hot paths.  Weight symmetry is
        checked exactly for integral weights and to ``rel_tol`` otherwise.
        """
        n, offs = self.num_vertices, self.offsets
        if offs.shape != (n + 1,) or offs[0] != 0 or offs[-1] != self.edges.size:
            raise ValueError("offsets array is inconsistent with edge count")
        if np.any(np.diff(offs) < 0):
            raise ValueError("offsets must be non-decreasing")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= n):
            raise ValueError("edge destination out of range")
        if np.any(~np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and non-negative")
        total = float(self.weights.sum())
        if abs(total - self.total_weight) > rel_tol * max(1.0, abs(total)):
            raise ValueError("total_weight does not match the weight sum")
        src = np.repeat(np.arange(n, dtype=VERTEX_DTYPE), np.diff(offs))
        order = np.lexsort((self.edges, src))
        s, d = src[order], self.edges[order]
        if s.size:
            dup = (s[1:] == s[:-1]) & (d[1:] == d[:-1])
            if np.any(dup):
                raise ValueError("duplicate arc within a row")
        # undirectedness: the arc multiset must equal its transpose
        w = self.weights[order]
        order_t = np.lexsort((s, d))
        if not (np.array_equal(s, d[order_t]) and np.array_equal(d, s[order_t])):
            raise ValueError("missing reverse arc")
        scale = max(1.0, float(np.abs(w).max())) if w.size else 1.0
        if w.size and np.max(np.abs(w - w[order_t])) > rel_tol * scale:
            raise ValueError("reverse arc weight mismatch")


def exclusive_scan(values: np.ndarray) -> np.ndarray:
    """Exclusive prefix sum: ``out[r] = sum(values[:r])``, same length as input.

    Empty input yields an empty output.  Integer inputs produce int64,
    everything else float64.
    """
    values = np.asarray(values)
    dtype = OFFSET_DTYPE if np.issubdtype(values.dtype, np.integer) else np.float64
    out = np.zeros(values.shape[0], dtype=dtype)
    if values.shape[0] > 1:
        np.cumsum(values[:-1], dtype=dtype, out=out[1:])
    return out


def offsets_from_counts(counts: np.ndarray) -> np.ndarray:
    """Exclusive scan with the grand total appended: a CSR offsets array."""
    out = np.zeros(counts.shape[0] + 1, dtype=OFFSET_DTYPE)
    np.cumsum(counts, dtype=OFFSET_DTYPE, out=out[1:])
    return out


def vertex_weights(g: CsrGraph, pool=None) -> np.ndarray:
    """Weighted degree K of every vertex: the row sum of its arc weights.

    Self-loops count once, as stored, so ``sum(k) == g.total_weight``.
    """
    from . import kernels

    k = np.zeros(g.num_vertices, dtype=np.float64)
    counter = np.zeros(1, dtype=np.int64)
    if pool is None or pool.threads == 1:
        kernels.fill_vertex_weights(g.offsets, g.weights, k, counter, kernels.DEFAULT_CHUNK)
    else:
        pool.run(
            lambda t: kernels.fill_vertex_weights(
                g.offsets, g.weights, k, counter, kernels.DEFAULT_CHUNK
            )
        )
    return k


def _merge_sorted_arcs(src, dst, w, reduce: str):
    """Lexsort arcs by (src, dst) and merge duplicates with sum or max."""
    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    if src.size == 0:
        return src, dst, w
    new_group = np.empty(src.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    starts = np.flatnonzero(new_group)
    ufunc = np.add if reduce == "sum" else np.maximum
    merged_w = ufunc.reduceat(w, starts)
    return src[starts], dst[starts], merged_w


def csr_from_arcs(num_vertices: int, src, dst, weights=None) -> CsrGraph:
    """Build a CsrGraph from an arc multiset already containing both directions.

    Duplicate arcs are merged by summing their weights.  No symmetry is
    enforced here; use :func:`csr_from_undirected` for one-sided input.
    """
    src = np.asarray(src, dtype=VERTEX_DTYPE)
    dst = np.asarray(dst, dtype=VERTEX_DTYPE)
    if weights is None:
        w = np.ones(src.size, dtype=WEIGHT_DTYPE)
    else:
        w = np.asarray(weights, dtype=WEIGHT_DTYPE)
    src, dst, w = _merge_sorted_arcs(src, dst, w, "sum")
    counts = np.bincount(src, minlength=num_vertices).astype(OFFSET_DTYPE)
    offsets = offsets_from_counts(counts)
    return CsrGraph(
        num_vertices=num_vertices,
        offsets=offsets,
        edges=dst.astype(VERTEX_DTYPE),
        weights=w,
        total_weight=float(w.sum()),
    )


def csr_from_undirected(num_vertices: int, src, dst, weights=None) -> CsrGraph:
    """Build a symmetrized CsrGraph from arcs that may list either direction.

    Duplicate arcs (same ordered pair) are merged by summing weights.  A
    missing reverse arc is then supplied; when both directions were listed
    with different merged weights, the larger one wins for both, so listing
    an undirected edge once or in both directions is equivalent.
    """
    src = np.asarray(src, dtype=VERTEX_DTYPE)
    dst = np.asarray(dst, dtype=VERTEX_DTYPE)
    if weights is None:
        w = np.ones(src.size, dtype=WEIGHT_DTYPE)
    else:
        w = np.asarray(weights, dtype=WEIGHT_DTYPE)
    src, dst, w = _merge_sorted_arcs(src, dst, w, "sum")
    both_src = np.concatenate([src, dst])
    both_dst = np.concatenate([dst, src])
    both_w = np.concatenate([w, w])
    s, d, mw = _merge_sorted_arcs(both_src, both_dst, both_w, "max")
    counts = np.bincount(s, minlength=num_vertices).astype(OFFSET_DTYPE)
    return CsrGraph(
        num_vertices=num_vertices,
        offsets=offsets_from_counts(counts),
        edges=d.astype(VERTEX_DTYPE),
        weights=mw,
        total_weight=float(mw.sum()),
    )


class HoleyCsrBuilder:
    """CSR with over-allocated row capacities and per-row fill counters.

    Rows are appended into independently; gaps stay between the filled part
    of one row and the start of the next until :meth:`compact` squeezes
    them out.  Concurrent appends to the same row must go through the
    kernel path, which bumps ``fill`` atomically; this Python API is for
    single-threaded use.
    """

    def __init__(self, capacities):
        capacities = np.asarray(capacities, dtype=OFFSET_DTYPE)
        self.capacity_offsets = offsets_from_counts(capacities)
        self.fill = np.zeros(capacities.size, dtype=OFFSET_DTYPE)
        total = int(self.capacity_offsets[-1])
        # holes are never read, so skip the zero fill
        self.edges = np.empty(total, dtype=VERTEX_DTYPE)
        self.weights = np.empty(total, dtype=WEIGHT_DTYPE)

    @property
    def num_rows(self) -> int:
        return self.fill.size

    def capacity(self, row: int) -> int:
        return int(self.capacity_offsets[row + 1] - self.capacity_offsets[row])

    def append(self, row: int, dst: int, weight: float = 1.0) -> None:
        slot = self.fill[row]
        if slot >= self.capacity(row):
            raise ValueError(f"row {row} capacity exceeded")
        pos = self.capacity_offsets[row] + slot
        self.edges[pos] = dst
        self.weights[pos] = weight
        self.fill[row] = slot + 1

    def row(self, r: int) -> tuple[np.ndarray, np.ndarray]:
        lo = self.capacity_offsets[r]
        hi = lo + self.fill[r]
        return self.edges[lo:hi], self.weights[lo:hi]

    def compact(self, pool=None) -> CsrGraph:
        """Drop the holes and return the packed CsrGraph."""
        from . import kernels

        offsets = offsets_from_counts(self.fill)
        m = int(offsets[-1])
        edges = np.empty(m, dtype=VERTEX_DTYPE)
        weights = np.empty(m, dtype=WEIGHT_DTYPE)
        counter = np.zeros(1, dtype=np.int64)
        args = (
            self.capacity_offsets, self.fill, self.edges, self.weights,
            offsets, edges, weights, counter, kernels.DEFAULT_CHUNK,
        )
        if pool is None or pool.threads == 1:
            kernels.compact_rows(*args)
        else:
            pool.run(lambda t: kernels.compact_rows(*args))
        return CsrGraph(
            num_vertices=self.num_rows,
            offsets=offsets,
            edges=edges,
            weights=weights,
            total_weight=float(weights.sum()),
        )
