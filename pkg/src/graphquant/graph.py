"""Undirected vertex-labeled graphs in compressed sparse form.

Vertices are dense 0-based integers. The adjacency is stored CSR-style
(indptr/indices) with both directions of every edge present, neighbor
lists sorted ascending, no duplicates and no self-loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError

# Hop count marking a vertex that cannot be reached from the BFS source.
UNREACHABLE = np.iinfo(np.int32).max


@dataclass(frozen=True)
class Graph:
    n: int
    indptr: np.ndarray   # int64, shape (n+1,)
    indices: np.ndarray  # int64, concatenated sorted neighbor lists
    labels: np.ndarray | None = None    # int64, shape (n,), values in 0..K-1
    features: np.ndarray | None = None  # float64, shape (n, d)

    @classmethod
    def from_edges(cls, n, edges, labels=None, features=None) -> "Graph":
        """Build a graph from an iterable of (u, v) pairs.

        Self-loops are dropped; duplicate and reversed pairs collapse to a
        single undirected edge.
        """
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64)
        if edges.size == 0:
            edges = edges.reshape(0, 2)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise DataError("edge array must have shape (m, 2)")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise DataError(f"edge endpoint out of range for n={n}")
        edges = edges[edges[:, 0] != edges[:, 1]]
        both = np.concatenate([edges, edges[:, ::-1]], axis=0)
        if both.size:
            both = np.unique(both, axis=0)
        u, v = both[:, 0], both[:, 1]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, u + 1, 1)
        indptr = np.cumsum(indptr)
        # rows already sorted by (u, v) thanks to np.unique
        return cls(n=int(n), indptr=indptr, indices=v.astype(np.int64),
                   labels=_validate_labels(labels, n),
                   features=_validate_features(features, n))

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def num_classes(self) -> int:
        if self.labels is None:
            raise DataError("graph has no labels")
        return int(self.labels.max()) + 1 if self.n else 0

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Both directions of every edge as parallel (source, target) arrays."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return src, self.indices

    def adjacency_csr(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


@dataclass(frozen=True)
class DistanceRow:
    """Hop distances from one source vertex; UNREACHABLE marks no path."""
    source: int
    dist: np.ndarray  # int32, shape (n,)


def _validate_labels(labels, n):
    if labels is None:
        return None
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (n,):
        raise DataError(f"labels must have length {n}, got {labels.shape}")
    if n and labels.min() < 0:
        raise DataError("labels must be non-negative")
    if n and labels.max() < 1:
        raise DataError("labeled graphs need at least 2 classes")
    return labels


def _validate_features(features, n):
    if features is None:
        return None
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != n:
        raise DataError(f"features must have {n} rows, got shape {features.shape}")
    return features


def load_graph(edge_path, labels_path=None, features_path=None, n=None) -> Graph:
    """Load a graph from an edge file plus optional labels/features files.

    Edge file: one "u v" pair per line (space or tab separated), '#' starts
    a comment. Labels file: one integer per line, line i labels vertex i.
    Features file: one comma-separated row of reals per vertex.

    The vertex count is (in order of precedence) the explicit `n`, the
    number of label lines, or max edge endpoint + 1.
    """
    edges = _parse_edge_file(edge_path)
    labels = _parse_labels_file(labels_path) if labels_path is not None else None
    max_id = int(edges.max()) if edges.size else -1
    if n is None:
        n = len(labels) if labels is not None else max_id + 1
    if max_id >= n:
        raise DataError(f"edge endpoint {max_id} out of range for n={n}")
    if labels is not None and len(labels) != n:
        raise DataError(f"labels file has {len(labels)} lines, expected {n}")
    features = _parse_features_file(features_path, n) if features_path is not None else None
    return Graph.from_edges(n, edges, labels=labels, features=features)


def save_graph(g: Graph, edge_path, labels_path=None, features_path=None) -> None:
    """Write a graph in the format accepted by load_graph (one edge per line, u < v)."""
    src, dst = g.edge_arrays()
    mask = src < dst
    lines = [f"{u} {v}" for u, v in zip(src[mask], dst[mask])]
    Path(edge_path).write_text("\n".join(lines) + ("\n" if lines else ""))
    if labels_path is not None:
        if g.labels is None:
            raise DataError("graph has no labels to save")
        Path(labels_path).write_text("".join(f"{y}\n" for y in g.labels))
    if features_path is not None:
        if g.features is None:
            raise DataError("graph has no features to save")
        rows = (",".join(repr(float(x)) for x in row) for row in g.features)
        Path(features_path).write_text("".join(r + "\n" for r in rows))


def _parse_edge_file(path) -> np.ndarray:
    edges = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'u v', got {raw.strip()!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer vertex id in {raw.strip()!r}")
            if u < 0 or v < 0:
                raise DataError(f"{path}:{lineno}: negative vertex id")
            edges.append((u, v))
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def _parse_labels_file(path) -> np.ndarray:
    labels = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise DataError(f"{path}:{lineno}: expected an integer label, got {line!r}")
    return np.asarray(labels, dtype=np.int64)


def _parse_features_file(path, n) -> np.ndarray:
    rows = []
    arity = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric feature value")
            if arity is None:
                arity = len(row)
            elif len(row) != arity:
                raise DataError(f"{path}:{lineno}: expected {arity} columns, got {len(row)}")
            rows.append(row)
    if len(rows) != n:
        raise DataError(f"features file has {len(rows)} rows, expected {n}")
    return np.asarray(rows, dtype=np.float64)


def _gather_neighbors(g: Graph, frontier: np.ndarray) -> np.ndarray:
    if len(frontier) == 0:
        return np.empty(0, dtype=np.int64)
    chunks = [g.indices[g.indptr[v]:g.indptr[v + 1]] for v in frontier]
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def bfs_distances(g: Graph, sources) -> list[DistanceRow]:
    """Exact unweighted hop distances from each source (one row per source)."""
    sources = np.asarray(list(sources), dtype=np.int64)
    if sources.size and (sources.min() < 0 or sources.max() >= g.n):
        raise DataError(f"BFS source out of range for n={g.n}")
    rows = []
    for s in sources:
        dist = np.full(g.n, UNREACHABLE, dtype=np.int32)
        dist[s] = 0
        frontier = np.asarray([s], dtype=np.int64)
        d = 0
        while len(frontier):
            nxt = _gather_neighbors(g, frontier)
            nxt = np.unique(nxt[dist[nxt] == UNREACHABLE]) if len(nxt) else nxt
            d += 1
            dist[nxt] = d
            frontier = nxt
        rows.append(DistanceRow(source=int(s), dist=dist))
    return rows


def connected_components(g: Graph) -> np.ndarray:
    """Per-vertex component ids, dense in 0..#components-1.

    Ids are assigned in order of the smallest vertex of each component.
    """
    comp = np.full(g.n, -1, dtype=np.int64)
    next_id = 0
    for v in range(g.n):
        if comp[v] != -1:
            continue
        comp[v] = next_id
        frontier = np.asarray([v], dtype=np.int64)
        while len(frontier):
            nxt = _gather_neighbors(g, frontier)
            nxt = np.unique(nxt[comp[nxt] == -1]) if len(nxt) else nxt
            comp[nxt] = next_id
            frontier = nxt
        next_id += 1
    return comp
