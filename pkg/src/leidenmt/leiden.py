"""The multithreaded Leiden pipeline: local moving, refinement, aggregation.

Each pass runs three phases over the current (super-vertex) graph:

* local moving — vertices greedily hop to the neighbouring community with
  the best modularity gain until the per-iteration gain drops below the
  tolerance (which shrinks by ``tolerance_drop`` every pass);
* refinement — within the communities just found (the *bounds*), vertices
  restart as singletons and isolated vertices merge into in-bound
  neighbouring sub-communities, greedily or by gain-proportional sampling;
* aggregation — every refined community collapses into a super-vertex;
  intra-community weight becomes its self-loop.

Passes stop on global convergence, when the community count stops
shrinking (aggregation tolerance), or at ``max_passes``.  The per-pass
memberships compose into the final flat assignment.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from . import kernels
from .graph import (
    CsrGraph,
    HoleyCsrBuilder,
    VERTEX_DTYPE,
    offsets_from_counts,
    vertex_weights,
)
from .parallel import WorkerPool
from .rng import derive_states
from .atomics import cas_f64

__all__ = [
    "RefineStrategy",
    "LabelStrategy",
    "LeidenConfig",
    "LeidenResult",
    "PassState",
    "ThreadAccumulator",
    "leiden",
    "leiden_move",
    "leiden_refine",
    "leiden_aggregate",
    "scan_communities",
    "scan_bounded",
    "claim_isolated",
    "delta_modularity",
    "count_community_vertices",
    "community_total_degree",
    "renumber_communities",
    "lookup_dendrogram",
]


class RefineStrategy(str, Enum):
    GREEDY = "greedy"
    RANDOM = "random"


class LabelStrategy(str, Enum):
    MOVE_BASED = "move"
    REFINE_BASED = "refine"


@dataclass
class LeidenConfig:
    """Knobs of the pipeline; defaults follow the tuned configuration.

    ``tolerance`` is the starting per-iteration convergence threshold and
    is divided by ``tolerance_drop`` after every pass.  Passes stop early
    when the community count shrinks by less than a factor of
    ``aggregation_tolerance``.  ``pruning`` and ``chunk_size`` are
    implementation tunables: flag-based vertex pruning and the number of
    vertices per dynamically claimed work chunk.
    """

    tolerance: float = 0.01
    tolerance_drop: float = 10.0
    aggregation_tolerance: float = 0.8
    max_iterations: int = 20
    max_passes: int = 10
    refine_strategy: RefineStrategy = RefineStrategy.GREEDY
    label_strategy: LabelStrategy = LabelStrategy.MOVE_BASED
    rng_seed: int = 1
    threads: int = 1
    pruning: bool = True
    chunk_size: int = kernels.DEFAULT_CHUNK

    def validate(self) -> None:
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.tolerance_drop > 1:
            raise ValueError("tolerance_drop must be > 1")
        if not 0 < self.aggregation_tolerance <= 1:
            raise ValueError("aggregation_tolerance must be in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")
        if not 0 < int(self.rng_seed) <= 0xFFFFFFFF:
            raise ValueError("rng_seed must be a nonzero 32-bit integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "LeidenConfig":
        """Build a config from a plain key/value mapping (flags, files)."""
        kwargs = {}
        for f in cls.__dataclass_fields__.values():
            if f.name not in mapping:
                continue
            value = mapping[f.name]
            if f.name == "refine_strategy":
                value = RefineStrategy(value)
            elif f.name == "label_strategy":
                value = LabelStrategy(value)
            elif f.name == "pruning":
                value = str(value).lower() in ("1", "true", "yes")
            elif f.name in ("tolerance", "tolerance_drop", "aggregation_tolerance"):
                value = float(value)
            else:
                value = int(value)
            kwargs[f.name] = value
        unknown = set(mapping) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "tolerance_drop": self.tolerance_drop,
            "aggregation_tolerance": self.aggregation_tolerance,
            "max_iterations": self.max_iterations,
            "max_passes": self.max_passes,
            "refine_strategy": self.refine_strategy.value,
            "label_strategy": self.label_strategy.value,
            "rng_seed": self.rng_seed,
            "threads": self.threads,
            "pruning": self.pruning,
            "chunk_size": self.chunk_size,
        }


class ThreadAccumulator:
    """Dense per-thread accumulator of edge weight per community id.

    ``values[c]`` holds the accumulated weight to community ``c``;
    ``touched`` lists the ids with entries so :meth:`clear` is O(touched).
    Entries are meaningful only for touched ids.
    """

    def __init__(self, capacity: int):
        self.values = np.zeros(capacity, dtype=np.float64)
        self.touched = np.empty(capacity, dtype=VERTEX_DTYPE)  # write-before-read
        self.marks = np.zeros(capacity, dtype=np.uint8)
        self.count = 0

    def add(self, community: int, weight: float) -> None:
        if not self.marks[community]:
            self.marks[community] = 1
            self.touched[self.count] = community
            self.count += 1
        self.values[community] += weight

    def items(self) -> list[tuple[int, float]]:
        ids = sorted(int(c) for c in self.touched[: self.count])
        return [(c, float(self.values[c])) for c in ids]

    def clear(self) -> None:
        for c in self.touched[: self.count]:
            self.values[c] = 0.0
            self.marks[c] = 0
        self.count = 0


@dataclass
class PassState:
    """Per-pass working set shared by the phases.

    ``sigma`` aggregates ``k`` by community at every phase boundary;
    phase kernels keep it consistent with atomic updates.
    """

    k: np.ndarray                 # float64[n] vertex weights
    sigma: np.ndarray             # float64[n] community weights
    processed: np.ndarray         # uint8[n] pruning flags
    accumulators: list[ThreadAccumulator]
    counter: np.ndarray           # int64[1] work-claim cursor
    rng_states: np.ndarray        # int64[threads] xorshift32 states

    @classmethod
    def create(cls, g: CsrGraph, membership: np.ndarray, threads: int = 1,
               rng_seed: int = 1, pool: WorkerPool | None = None,
               rng_states: np.ndarray | None = None) -> "PassState":
        n = g.num_vertices
        k = vertex_weights(g, pool)
        sigma = np.bincount(membership, weights=k, minlength=n).astype(np.float64)
        if rng_states is None:
            rng_states = derive_states(rng_seed, threads)
        return cls(
            k=k,
            sigma=sigma,
            processed=np.zeros(n, dtype=np.uint8),
            accumulators=[ThreadAccumulator(n) for _ in range(threads)],
            counter=np.zeros(1, dtype=np.int64),
            rng_states=rng_states,
        )


@dataclass
class LeidenResult:
    """Outcome of a full run: flat renumbered membership plus instrumentation."""

    membership: np.ndarray
    num_communities: int
    passes: int
    iterations: list[tuple[int, int]]
    phase_seconds: dict[str, float]

    def total_seconds(self) -> float:
        return sum(self.phase_seconds.values())


def delta_modularity(k_to_c: float, k_to_d: float, k_i: float,
                     sigma_c: float, sigma_d: float, m: float) -> float:
    """Modularity change of moving a vertex from community d into c.

    ``sigma_c`` is the target community's total weight without the vertex,
    ``sigma_d`` the source community's total weight including it; the two
    ``k_to_*`` terms exclude self-loops.
    """
    return (k_to_c - k_to_d) / m - k_i * (k_i + sigma_c - sigma_d) / (2.0 * m * m)


def scan_communities(acc: ThreadAccumulator, g: CsrGraph, membership: np.ndarray,
                     i: int, include_self: bool) -> ThreadAccumulator:
    """Accumulate i's arc weights by neighbour community into ``acc``.

    Arcs to i itself are skipped unless ``include_self``.  ``acc`` is not
    cleared: aggregation deliberately accumulates across a community.
    """
    dsts, ws = g.row(i)
    for j, w in zip(dsts, ws):
        if not include_self and j == i:
            continue
        acc.add(int(membership[j]), float(w))
    return acc


def scan_bounded(acc: ThreadAccumulator, g: CsrGraph, bounds: np.ndarray,
                 membership: np.ndarray, i: int) -> ThreadAccumulator:
    """Like :func:`scan_communities` (self excluded) but arcs leaving
    i's bound community are skipped."""
    b = bounds[i]
    dsts, ws = g.row(i)
    for j, w in zip(dsts, ws):
        if j == i or bounds[j] != b:
            continue
        acc.add(int(membership[j]), float(w))
    return acc


def claim_isolated(sigma: np.ndarray, index: int, expected: float) -> bool:
    """Atomically zero ``sigma[index]`` iff it bit-equals ``expected``."""
    return bool(cas_f64(sigma, index, float(expected), 0.0))


def leiden_move(g: CsrGraph, state: PassState, membership: np.ndarray,
                tolerance: float, *, max_iterations: int = 20,
                pool: WorkerPool | None = None, prune: bool = True,
                chunk: int = kernels.DEFAULT_CHUNK) -> int:
    """Local-moving phase; returns the number of iterations performed.

    Iterates until an iteration's total gain is at most ``tolerance`` or
    ``max_iterations`` is reached.  A successful move re-marks the mover's
    neighbours for rescanning (vertex pruning).
    """
    state.processed[:] = 0
    m = g.total_weight / 2.0
    run_pool = pool if pool is not None else _INLINE_POOL
    iterations = 0
    for _ in range(max_iterations):
        iterations += 1
        state.counter[0] = 0
        partials = run_pool.run(
            lambda t: kernels.move_sweep(
                g.offsets, g.edges, g.weights, membership, state.k, state.sigma,
                state.processed, state.accumulators[t].values,
                state.accumulators[t].touched, state.accumulators[t].marks,
                state.counter, chunk, m, prune,
            )
        )
        if sum(partials) <= tolerance:
            break
    return iterations


def leiden_refine(g: CsrGraph, bounds: np.ndarray, membership: np.ndarray,
                  state: PassState, *,
                  strategy: RefineStrategy = RefineStrategy.GREEDY,
                  pool: WorkerPool | None = None,
                  chunk: int = kernels.DEFAULT_CHUNK) -> int:
    """Refinement phase (one sweep); returns 1 if any vertex moved, else 0.

    Expects singleton ``membership`` with ``state.sigma`` equal to
    ``state.k``.  Only isolated vertices move, and only inside their bound
    community; the claim/attach protocol keeps sub-communities connected.
    """
    m = g.total_weight / 2.0
    run_pool = pool if pool is not None else _INLINE_POOL
    state.counter[0] = 0
    if strategy is RefineStrategy.GREEDY:
        moved = run_pool.run(
            lambda t: kernels.refine_sweep_greedy(
                g.offsets, g.edges, g.weights, bounds, membership, state.k,
                state.sigma, state.accumulators[t].values,
                state.accumulators[t].touched, state.accumulators[t].marks,
                state.counter, chunk, m,
            )
        )
    else:
        moved = run_pool.run(
            lambda t: kernels.refine_sweep_random(
                g.offsets, g.edges, g.weights, bounds, membership, state.k,
                state.sigma, state.accumulators[t].values,
                state.accumulators[t].touched, state.accumulators[t].marks,
                state.counter, chunk, m, state.rng_states[t:t + 1],
            )
        )
    return 1 if sum(moved) > 0 else 0


def count_community_vertices(membership: np.ndarray,
                             num_communities: int | None = None,
                             pool: WorkerPool | None = None,
                             chunk: int = kernels.DEFAULT_CHUNK) -> np.ndarray:
    """Number of vertices in each community (ids must be dense)."""
    if num_communities is None:
        num_communities = int(membership.max()) + 1 if membership.size else 0
    counts = np.zeros(num_communities, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    run_pool = pool if pool is not None else _INLINE_POOL
    run_pool.run(lambda t: kernels.count_by_community(membership, counts, counter, chunk))
    return counts


def community_total_degree(g: CsrGraph, membership: np.ndarray,
                           num_communities: int | None = None,
                           pool: WorkerPool | None = None,
                           chunk: int = kernels.DEFAULT_CHUNK) -> np.ndarray:
    """Sum of member row lengths per community: a super-vertex degree bound."""
    if num_communities is None:
        num_communities = int(membership.max()) + 1 if membership.size else 0
    degrees = np.zeros(num_communities, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    run_pool = pool if pool is not None else _INLINE_POOL
    run_pool.run(
        lambda t: kernels.degree_by_community(g.offsets, membership, degrees, counter, chunk)
    )
    return degrees


def leiden_aggregate(g: CsrGraph, membership: np.ndarray,
                     num_communities: int | None = None,
                     pool: WorkerPool | None = None,
                     chunk: int = kernels.DEFAULT_CHUNK) -> CsrGraph:
    """Contract each community into a super-vertex; weights are conserved.

    ``membership`` must be renumbered (dense ids).  Intra-community weight
    surfaces as the super-vertex self-loop: an internal edge is scanned
    from both endpoints, so the self-loop carries twice its weight, which
    keeps the total weight invariant across passes.
    """
    if num_communities is None:
        num_communities = int(membership.max()) + 1 if membership.size else 0
    run_pool = pool if pool is not None else _INLINE_POOL
    threads = run_pool.threads

    counts = count_community_vertices(membership, num_communities, run_pool, chunk)
    member_offsets = offsets_from_counts(counts)
    members = np.empty(g.num_vertices, dtype=VERTEX_DTYPE)
    member_fill = np.zeros(num_communities, dtype=np.int64)
    counter = np.zeros(1, dtype=np.int64)
    run_pool.run(
        lambda t: kernels.place_community_vertices(
            membership, member_offsets, member_fill, members, counter, chunk
        )
    )

    degrees = community_total_degree(g, membership, num_communities, run_pool, chunk)
    builder = HoleyCsrBuilder(degrees)
    accumulators = [ThreadAccumulator(g.num_vertices) for _ in range(threads)]
    counter[0] = 0
    run_pool.run(
        lambda t: kernels.aggregate_rows(
            g.offsets, g.edges, g.weights, membership, member_offsets, members,
            builder.capacity_offsets, builder.fill, builder.edges,
            builder.weights, accumulators[t].values, accumulators[t].touched,
            accumulators[t].marks, counter, chunk,
        )
    )
    out = builder.compact(run_pool)
    drift = abs(out.total_weight - g.total_weight)
    if drift > 1e-9 * max(1.0, g.total_weight):
        raise AssertionError(
            f"aggregation lost weight: {g.total_weight} -> {out.total_weight}"
        )
    return out


def renumber_communities(membership: np.ndarray) -> tuple[np.ndarray, int]:
    """Remap used ids onto [0, count) preserving ascending id order."""
    membership = np.asarray(membership)
    if membership.size == 0:
        return membership.astype(VERTEX_DTYPE), 0
    used, inverse = np.unique(membership, return_inverse=True)
    return inverse.astype(VERTEX_DTYPE), int(used.size)


def lookup_dendrogram(top: np.ndarray, nxt: np.ndarray) -> np.ndarray:
    """Compose memberships: ``out[i] = nxt[top[i]]``."""
    top = np.asarray(top)
    if top.size and (top.min() < 0 or top.max() >= nxt.size):
        raise AssertionError("dendrogram lookup out of range: bad renumbering")
    return nxt[top].astype(VERTEX_DTYPE)


class _InlinePool:
    """Degenerate pool running the single worker on the calling thread."""

    threads = 1

    @staticmethod
    def run(fn):
        return [fn(0)]


_INLINE_POOL = _InlinePool()


def leiden(g: CsrGraph, cfg: LeidenConfig | None = None,
           trace: list | None = None) -> LeidenResult:
    """Run the full pipeline and return the flat, renumbered membership.

    When ``trace`` is a list, a per-pass snapshot dict is appended after
    refinement (bounds, refined labels, and the flattened membership over
    the original vertices) — a testing hook.
    """
    cfg = cfg if cfg is not None else LeidenConfig()
    cfg.validate()
    n = g.num_vertices
    phase = {"local_moving": 0.0, "refinement": 0.0, "aggregation": 0.0, "other": 0.0}
    if n == 0:
        return LeidenResult(
            membership=np.empty(0, dtype=VERTEX_DTYPE),
            num_communities=0, passes=0, iterations=[], phase_seconds=phase,
        )

    started = time.perf_counter()
    flat = np.arange(n, dtype=VERTEX_DTYPE)
    current = g
    labels = np.arange(n, dtype=VERTEX_DTYPE)
    tol = cfg.tolerance
    rng_states = derive_states(cfg.rng_seed, cfg.threads)
    iterations: list[tuple[int, int]] = []
    passes = 0

    with WorkerPool(cfg.threads) as pool:
        for _ in range(cfg.max_passes):
            n_cur = current.num_vertices
            state = PassState.create(
                current, labels, threads=cfg.threads, pool=pool, rng_states=rng_states
            )

            t0 = time.perf_counter()
            li = leiden_move(
                current, state, labels, tol, max_iterations=cfg.max_iterations,
                pool=pool, prune=cfg.pruning, chunk=cfg.chunk_size,
            )
            t1 = time.perf_counter()
            phase["local_moving"] += t1 - t0

            bounds = labels
            labels = np.arange(n_cur, dtype=VERTEX_DTYPE)
            state.sigma[:] = state.k

            t0 = time.perf_counter()
            lj = leiden_refine(
                current, bounds, labels, state, strategy=cfg.refine_strategy,
                pool=pool, chunk=cfg.chunk_size,
            )
            t1 = time.perf_counter()
            phase["refinement"] += t1 - t0

            iterations.append((li, lj))
            passes += 1
            if trace is not None:
                trace.append({
                    "pass": passes - 1,
                    "bounds": bounds.copy(),
                    "refined": labels.copy(),
                    "flattened": labels[flat].copy(),
                })
            if li + lj <= 1:
                break

            renumbered, n_comms = renumber_communities(labels)
            if n_comms / n_cur > cfg.aggregation_tolerance:
                break
            labels = renumbered
            flat = lookup_dendrogram(flat, labels)

            t0 = time.perf_counter()
            current = leiden_aggregate(current, labels, n_comms, pool, cfg.chunk_size)
            t1 = time.perf_counter()
            phase["aggregation"] += t1 - t0

            if cfg.label_strategy is LabelStrategy.MOVE_BASED:
                super_labels = np.empty(n_comms, dtype=VERTEX_DTYPE)
                super_labels[labels] = bounds
                labels, _ = renumber_communities(super_labels)
            else:
                labels = np.arange(n_comms, dtype=VERTEX_DTYPE)
            tol = tol / cfg.tolerance_drop

    flat = lookup_dendrogram(flat, labels)
    membership, num_communities = renumber_communities(flat)
    phase["other"] = max(0.0, (time.perf_counter() - started) - sum(
        phase[key] for key in ("local_moving", "refinement", "aggregation")
    ))
    return LeidenResult(
        membership=membership,
        num_communities=num_communities,
        passes=passes,
        iterations=iterations,
        phase_seconds=phase,
    )
