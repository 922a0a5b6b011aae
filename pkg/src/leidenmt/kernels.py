"""Nogil numba kernels behind the parallel phases.

Every sweep claims work from a shared ``counter`` in fixed-size chunks
(``DEFAULT_CHUNK`` vertices), giving OpenMP-dynamic-style load balancing.
Worker threads call these kernels concurrently; shared state is updated
only through the atomics in :mod:`leidenmt.atomics`, except for benignly
racy processed flags and aligned membership stores.

The per-thread accumulator is a dense float array keyed by community id
plus a touched-id list and marker bytes, so clearing costs O(touched).
"""

import numpy as np
from numba import njit

from .atomics import atomic_add_f64, atomic_add_i64, atomic_cas_f64

DEFAULT_CHUNK = 2048

# BFS work-list chunking for community ownership (see audit module).
BFS_CHUNK = 1024


@njit(inline="always")
def _claim(counter, chunk, n):
    start = atomic_add_i64(counter, 0, chunk)
    end = start + chunk
    if end > n:
        end = n
    return start, end


@njit(cache=True, nogil=True)
def fill_vertex_weights(offsets, weights, k, counter, chunk):
    n = k.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for i in range(start, end):
            s = 0.0
            for e in range(offsets[i], offsets[i + 1]):
                s += weights[e]
            k[i] = s


@njit(inline="always")
def _scan_arcs(hval, htouch, hmark, nt, offsets, edges, weights, membership,
               i, include_self):
    """Accumulate i's arc weights by destination community into the accumulator."""
    for e in range(offsets[i], offsets[i + 1]):
        j = edges[e]
        if (not include_self) and j == i:
            continue
        c = membership[j]
        if hmark[c] == 0:
            hmark[c] = 1
            htouch[nt] = c
            nt += 1
        hval[c] += weights[e]
    return nt


@njit(inline="always")
def _scan_arcs_bounded(hval, htouch, hmark, nt, offsets, edges, weights,
                       bounds, membership, i):
    """Like ``_scan_arcs`` with self excluded, skipping arcs leaving i's bound."""
    b = bounds[i]
    for e in range(offsets[i], offsets[i + 1]):
        j = edges[e]
        if j == i:
            continue
        if bounds[j] != b:
            continue
        c = membership[j]
        if hmark[c] == 0:
            hmark[c] = 1
            htouch[nt] = c
            nt += 1
        hval[c] += weights[e]
    return nt


@njit(inline="always")
def _clear(hval, htouch, hmark, nt):
    for x in range(nt):
        c = htouch[x]
        hval[c] = 0.0
        hmark[c] = 0


@njit(inline="always")
def _gain(k_to_c, k_to_d, k_i, sigma_c, sigma_d, m):
    return (k_to_c - k_to_d) / m - k_i * (k_i + sigma_c - sigma_d) / (2.0 * m * m)


@njit(cache=True, nogil=True)
def move_sweep(offsets, edges, weights, membership, k, sigma, processed,
               hval, htouch, hmark, counter, chunk, m, prune):
    """One local-moving iteration over the claimed vertices.

    Returns this worker's contribution to the iteration's total gain.
    """
    n = membership.size
    dq_total = 0.0
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return dq_total
        for i in range(start, end):
            if prune and processed[i] != 0:
                continue
            processed[i] = 1
            nt = _scan_arcs(hval, htouch, hmark, 0, offsets, edges, weights,
                            membership, i, False)
            d = membership[i]
            k_i = k[i]
            k_to_d = hval[d]
            sigma_d = sigma[d]
            best_c = d
            best_dq = 0.0
            for x in range(nt):
                c = htouch[x]
                if c == d:
                    continue
                dq = _gain(hval[c], k_to_d, k_i, sigma[c], sigma_d, m)
                if dq > best_dq or (dq == best_dq and best_dq > 0.0 and c < best_c):
                    best_c = c
                    best_dq = dq
            _clear(hval, htouch, hmark, nt)
            if best_c == d:
                continue
            atomic_add_f64(sigma, d, -k_i)
            atomic_add_f64(sigma, best_c, k_i)
            membership[i] = best_c
            dq_total += best_dq
            if prune:
                for e in range(offsets[i], offsets[i + 1]):
                    processed[edges[e]] = 0


@njit(inline="always")
def _try_join(sigma, own, target, k_i):
    """Claim i's isolation and attach its weight to ``target``.

    The claim zeroes i's own slot via CAS (fails if i is no longer alone).
    The attach refuses a vacated target (slot already zero): joining an
    empty community could otherwise stitch together vertices with no edge
    between them.  On refusal the claim is rolled back.
    """
    if not atomic_cas_f64(sigma, own, k_i, 0.0):
        return False
    while True:
        cur = sigma[target]
        if cur == 0.0:
            atomic_add_f64(sigma, own, k_i)
            return False
        if atomic_cas_f64(sigma, target, cur, cur + k_i):
            return True


@njit(cache=True, nogil=True)
def refine_sweep_greedy(offsets, edges, weights, bounds, membership, k, sigma,
                        hval, htouch, hmark, counter, chunk, m):
    """Constrained-merge sweep picking the best in-bound community per vertex.

    Only isolated vertices (alone in their community) may move.  Returns
    the number of vertices this worker moved.
    """
    n = membership.size
    moved = 0
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return moved
        for i in range(start, end):
            c = membership[i]
            k_i = k[i]
            if sigma[c] != k_i:
                continue
            nt = _scan_arcs_bounded(hval, htouch, hmark, 0, offsets, edges,
                                    weights, bounds, membership, i)
            k_to_d = hval[c]
            sigma_d = sigma[c]
            best_c = c
            best_dq = 0.0
            for x in range(nt):
                cand = htouch[x]
                if cand == c:
                    continue
                dq = _gain(hval[cand], k_to_d, k_i, sigma[cand], sigma_d, m)
                if dq > best_dq or (dq == best_dq and best_dq > 0.0 and cand < best_c):
                    best_c = cand
                    best_dq = dq
            _clear(hval, htouch, hmark, nt)
            if best_c == c:
                continue
            if _try_join(sigma, c, best_c, k_i):
                membership[i] = best_c
                moved += 1


@njit(inline="always")
def _xorshift32(state):
    state ^= (state << 13) & 0xFFFFFFFF
    state ^= state >> 17
    state ^= (state << 5) & 0xFFFFFFFF
    return state


@njit(cache=True, nogil=True)
def refine_sweep_random(offsets, edges, weights, bounds, membership, k, sigma,
                        hval, htouch, hmark, counter, chunk, m, rng):
    """Constrained-merge sweep sampling an in-bound community per vertex.

    A positive-gain candidate is chosen with probability proportional to
    its gain, using this worker's xorshift32 state (``rng`` is a one-cell
    view).  Falls back to no move when no candidate has positive gain.
    """
    n = membership.size
    moved = 0
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return moved
        for i in range(start, end):
            c = membership[i]
            k_i = k[i]
            if sigma[c] != k_i:
                continue
            nt = _scan_arcs_bounded(hval, htouch, hmark, 0, offsets, edges,
                                    weights, bounds, membership, i)
            k_to_d = hval[c]
            sigma_d = sigma[c]
            total = 0.0
            for x in range(nt):
                cand = htouch[x]
                if cand == c:
                    continue
                dq = _gain(hval[cand], k_to_d, k_i, sigma[cand], sigma_d, m)
                if dq > 0.0:
                    total += dq
            best_c = c
            if total > 0.0:
                state = _xorshift32(rng[0])
                rng[0] = state
                target_mass = (state / 4294967296.0) * total
                acc = 0.0
                for x in range(nt):
                    cand = htouch[x]
                    if cand == c:
                        continue
                    dq = _gain(hval[cand], k_to_d, k_i, sigma[cand], sigma_d, m)
                    if dq <= 0.0:
                        continue
                    acc += dq
                    best_c = cand
                    if acc > target_mass:
                        break
            _clear(hval, htouch, hmark, nt)
            if best_c == c:
                continue
            if _try_join(sigma, c, best_c, k_i):
                membership[i] = best_c
                moved += 1


@njit(cache=True, nogil=True)
def count_by_community(membership, counts, counter, chunk):
    n = membership.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for i in range(start, end):
            atomic_add_i64(counts, membership[i], 1)


@njit(cache=True, nogil=True)
def degree_by_community(offsets, membership, degrees, counter, chunk):
    n = membership.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for i in range(start, end):
            atomic_add_i64(degrees, membership[i], offsets[i + 1] - offsets[i])


@njit(cache=True, nogil=True)
def place_community_vertices(membership, member_offsets, fill, members,
                             counter, chunk):
    n = membership.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for i in range(start, end):
            c = membership[i]
            slot = atomic_add_i64(fill, c, 1)
            members[member_offsets[c] + slot] = i


@njit(cache=True, nogil=True)
def aggregate_rows(offsets, edges, weights, membership, member_offsets,
                   members, capacity_offsets, fill, out_edges, out_weights,
                   hval, htouch, hmark, counter, chunk):
    """Build one super-vertex row per claimed community.

    The accumulator collects the total weight from the community's members
    to every neighbouring community (self included, so intra-community
    weight becomes the super-vertex self-loop).  Rows are owned by exactly
    one worker, so the fill store needs no atomics.
    """
    nc = fill.size
    while True:
        start, end = _claim(counter, chunk, nc)
        if start >= nc:
            return
        for c in range(start, end):
            nt = 0
            for x in range(member_offsets[c], member_offsets[c + 1]):
                i = members[x]
                nt = _scan_arcs(hval, htouch, hmark, nt, offsets, edges,
                                weights, membership, i, True)
            base = capacity_offsets[c]
            for x in range(nt):
                d = htouch[x]
                out_edges[base + x] = d
                out_weights[base + x] = hval[d]
                hval[d] = 0.0
                hmark[d] = 0
            fill[c] = nt


@njit(cache=True, nogil=True)
def compact_rows(capacity_offsets, fill, in_edges, in_weights, out_offsets,
                 out_edges, out_weights, counter, chunk):
    n = fill.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for r in range(start, end):
            src = capacity_offsets[r]
            dst = out_offsets[r]
            for x in range(fill[r]):
                out_edges[dst + x] = in_edges[src + x]
                out_weights[dst + x] = in_weights[src + x]


@njit(cache=True, nogil=True)
def intra_weight_partials(offsets, edges, weights, membership, out, counter,
                          chunk):
    """Per-vertex weight of arcs staying inside the vertex's community.

    Row order is fixed, so the per-vertex value is identical whichever
    worker computes it; downstream reductions stay thread-count invariant.
    """
    n = membership.size
    while True:
        start, end = _claim(counter, chunk, n)
        if start >= n:
            return
        for i in range(start, end):
            c = membership[i]
            s = 0.0
            for e in range(offsets[i], offsets[i + 1]):
                if membership[edges[e]] == c:
                    s += weights[e]
            out[i] = s


@njit(cache=True, nogil=True)
def bfs_audit(offsets, edges, membership, size_work, disconnected, visited,
              queue, worker, num_workers, chi):
    """Flag communities whose induced subgraph a BFS cannot cover.

    Worker ``worker`` owns community c iff ``(c // chi) % num_workers ==
    worker``; it scans all vertices in global order and seeds a BFS from
    the first unprocessed vertex of each owned community.  ``size_work``
    doubles as the processed marker (zeroed after the community is done),
    so each community is traversed exactly once and the shared ``visited``
    array never conflicts across workers.
    """
    n = membership.size
    for i in range(n):
        c = membership[i]
        if size_work[c] == 0:
            continue
        if (c // chi) % num_workers != worker:
            continue
        head = 0
        tail = 0
        visited[i] = 1
        queue[tail] = i
        tail += 1
        reached = 0
        while head < tail:
            u = queue[head]
            head += 1
            reached += 1
            for e in range(offsets[u], offsets[u + 1]):
                j = edges[e]
                if visited[j] == 0 and membership[j] == c:
                    visited[j] = 1
                    queue[tail] = j
                    tail += 1
        if reached < size_work[c]:
            disconnected[c] = 1
        size_work[c] = 0
