"""Graph and membership file readers/writers.

MatrixMarket coordinate files are the primary input format; a plain
edge-list reader covers test fixtures.  Both produce symmetrized
:class:`~leidenmt.graph.CsrGraph` instances: duplicate arcs are merged by
summing, missing reverse arcs are supplied, and pattern entries get unit
weight.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .graph import CsrGraph, csr_from_undirected

__all__ = [
    "GraphLoadError",
    "load_matrix_market",
    "load_edge_list",
    "load_graph",
    "write_membership",
    "read_membership",
]

_MM_FIELDS = {"pattern", "integer", "real"}
_MM_SYMMETRIES = {"general", "symmetric"}


class GraphLoadError(ValueError):
    """Raised for malformed graph files; the message names file and line."""


def _fail(path, lineno: int, reason: str):
    raise GraphLoadError(f"{path}:{lineno}: {reason}")


def load_matrix_market(path) -> CsrGraph:
    """Read a MatrixMarket coordinate file as a symmetrized CsrGraph.

    Accepted header: ``%%MatrixMarket matrix coordinate
    {pattern|integer|real} {general|symmetric}``.  Indices are 1-based.
    For ``general`` files a missing reverse arc is added (an arc listed in
    both directions is kept, not doubled); ``symmetric`` files expand each
    off-diagonal entry into both arcs.  Self-loops are stored once.
    Vertices beyond the referenced ones (per the size header) stay
    isolated.
    """
    path = Path(path)
    with open(path, "rt", encoding="utf-8") as handle:
        header = handle.readline()
        if not header:
            _fail(path, 1, "empty file, expected MatrixMarket header")
        tokens = header.strip().split()
        if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
            _fail(path, 1, "malformed header, expected '%%MatrixMarket matrix "
                           "coordinate <field> <symmetry>'")
        _, obj, fmt, field, symmetry = (tok.lower() for tok in tokens)
        if obj != "matrix" or fmt != "coordinate":
            _fail(path, 1, f"unsupported MatrixMarket type '{obj} {fmt}', "
                           "only 'matrix coordinate' is handled")
        if field not in _MM_FIELDS:
            _fail(path, 1, f"unsupported field '{field}', expected one of "
                           f"{sorted(_MM_FIELDS)}")
        if symmetry not in _MM_SYMMETRIES:
            _fail(path, 1, f"unsupported symmetry '{symmetry}', expected one "
                           f"of {sorted(_MM_SYMMETRIES)}")

        lineno = 1
        size_line = None
        for line in handle:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            _fail(path, lineno, "missing size line")
        parts = size_line.split()
        if len(parts) != 3:
            _fail(path, lineno, "malformed size line, expected 'rows cols nnz'")
        try:
            rows, cols, nnz = (int(p) for p in parts)
        except ValueError:
            _fail(path, lineno, "malformed size line, expected integers")
        if rows < 0 or cols < 0 or nnz < 0:
            _fail(path, lineno, "size line entries must be non-negative")
        n = max(rows, cols)

        pattern = field == "pattern"
        src = np.empty(nnz, dtype=np.int64)
        dst = np.empty(nnz, dtype=np.int64)
        weights = np.ones(nnz, dtype=np.float64)
        seen = 0
        for line in handle:
            lineno += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("%"):
                continue
            if seen >= nnz:
                _fail(path, lineno, f"more than the declared {nnz} entries")
            parts = stripped.split()
            expected = 2 if pattern else 3
            if len(parts) < expected:
                _fail(path, lineno, f"malformed entry, expected {expected} fields")
            try:
                i = int(parts[0])
                j = int(parts[1])
            except ValueError:
                _fail(path, lineno, "malformed entry, vertex indices must be integers")
            if not (1 <= i <= rows and 1 <= j <= cols):
                _fail(path, lineno, f"vertex index out of range: ({i}, {j}) "
                                    f"with size header {rows} x {cols}")
            if pattern:
                w = 1.0
            else:
                try:
                    w = float(parts[2])
                except ValueError:
                    _fail(path, lineno, "malformed entry, weight must be numeric")
                if not np.isfinite(w):
                    _fail(path, lineno, "weight must be finite")
                if w < 0:
                    _fail(path, lineno, f"negative weight {w}")
            src[seen] = i - 1
            dst[seen] = j - 1
            weights[seen] = w
            seen += 1
        if seen != nnz:
            _fail(path, lineno + 1, f"expected {nnz} entries, found {seen}")

    if symmetry == "symmetric":
        off_diag = src != dst
        mirrored_src = np.concatenate([src, dst[off_diag]])
        mirrored_dst = np.concatenate([dst, src[off_diag]])
        weights = np.concatenate([weights, weights[off_diag]])
        src, dst = mirrored_src, mirrored_dst
    return csr_from_undirected(n, src, dst, weights)


def load_edge_list(path, num_vertices: int | None = None) -> CsrGraph:
    """Read a ``src dst [weight]`` per line edge list (0-based, '#' comments).

    The result is symmetrized exactly like a ``general`` MatrixMarket
    file.  ``num_vertices`` overrides the default of max id + 1, allowing
    trailing isolated vertices.
    """
    path = Path(path)
    try:
        data = np.loadtxt(path, comments="#", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise GraphLoadError(f"{path}: malformed edge list: {exc}") from exc
    if data.size == 0:
        return csr_from_undirected(num_vertices or 0, [], [], [])
    if data.shape[1] == 2:
        src, dst = data[:, 0], data[:, 1]
        weights = np.ones(data.shape[0], dtype=np.float64)
    elif data.shape[1] == 3:
        src, dst, weights = data[:, 0], data[:, 1], data[:, 2]
    else:
        raise GraphLoadError(f"{path}: expected 2 or 3 columns, "
                             f"found {data.shape[1]}")
    isrc = src.astype(np.int64)
    idst = dst.astype(np.int64)
    if np.any(isrc != src) or np.any(idst != dst):
        raise GraphLoadError(f"{path}: vertex ids must be integers")
    if isrc.size and (isrc.min() < 0 or idst.min() < 0):
        raise GraphLoadError(f"{path}: vertex ids must be non-negative")
    if np.any(weights < 0) or np.any(~np.isfinite(weights)):
        raise GraphLoadError(f"{path}: weights must be finite and non-negative")
    n = int(max(isrc.max(), idst.max())) + 1
    if num_vertices is not None:
        if num_vertices < n:
            raise GraphLoadError(f"{path}: vertex index out of range: id "
                                 f"{n - 1} with num_vertices {num_vertices}")
        n = num_vertices
    return csr_from_undirected(n, isrc, idst, weights)


def load_graph(path) -> CsrGraph:
    """Dispatch on extension: ``.mtx`` is MatrixMarket, anything else an
    edge list."""
    path = Path(path)
    if path.suffix.lower() == ".mtx":
        return load_matrix_market(path)
    return load_edge_list(path)


def write_membership(path, membership: np.ndarray) -> None:
    """Write one ``vertex<TAB>community`` line per vertex (0-based)."""
    membership = np.asarray(membership)
    with open(path, "wt", encoding="utf-8") as handle:
        handle.writelines(
            f"{v}\t{int(c)}\n" for v, c in enumerate(membership)
        )


def read_membership(path, num_vertices: int | None = None) -> np.ndarray:
    """Read a membership TSV as written by :func:`write_membership`.

    Rows may be permuted; every vertex in [0, N) must appear exactly once.
    ``num_vertices`` (when given) must match the row count.
    """
    path = Path(path)
    try:
        data = np.loadtxt(path, comments="#", dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise GraphLoadError(f"{path}: malformed membership file: {exc}") from exc
    if data.size == 0:
        data = data.reshape(0, 2)
    if data.shape[1] != 2:
        raise GraphLoadError(f"{path}: expected 2 columns, found {data.shape[1]}")
    n = data.shape[0]
    if num_vertices is not None and n != num_vertices:
        raise GraphLoadError(
            f"{path}: membership/graph size mismatch: {n} rows for "
            f"{num_vertices} vertices"
        )
    vertices = data[:, 0]
    if np.unique(vertices).size != n or (n and (vertices.min() != 0 or vertices.max() != n - 1)):
        raise GraphLoadError(f"{path}: vertex column must cover 0..{n - 1} exactly once")
    membership = np.empty(n, dtype=np.int64)
    membership[vertices] = data[:, 1]
    if n and membership.min() < 0:
        raise GraphLoadError(f"{path}: community ids must be non-negative")
    return membership
