"""Built-in baseline node classifiers and prediction-file ingestion.

These keep the toolkit runnable end to end without any ML framework;
externally trained model outputs are loaded from files instead.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError
from .estimation import PredictionSet
from .graph import Graph

DEFAULT_LP_ITERATIONS = 50
DEFAULT_LP_DAMPING = 0.85


def _infer_num_classes(g: Graph, train_labels, num_classes):
    if num_classes is not None:
        return int(num_classes)
    if g.labels is not None:
        return g.num_classes
    return int(np.max(train_labels)) + 1


def enq_predict(g: Graph, train_vertices, train_labels, num_classes=None) -> PredictionSet:
    """Neighborhood-majority classifier: each vertex gets the normalized label
    histogram of its labeled training neighbors as its probability row.

    Vertices without any labeled neighbor fall back to the global training
    label histogram. Hard labels are the argmax (ties to the lowest index).
    """
    train_vertices = np.asarray(train_vertices, dtype=np.int64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if len(train_vertices) == 0:
        raise DataError("ENQ needs a non-empty training set")
    K = _infer_num_classes(g, train_labels, num_classes)
    label_of = np.full(g.n, -1, dtype=np.int64)
    label_of[train_vertices] = train_labels
    src, dst = g.edge_arrays()
    labeled = label_of[dst] >= 0
    counts = np.zeros((g.n, K))
    np.add.at(counts, (src[labeled], label_of[dst[labeled]]), 1.0)
    totals = counts.sum(axis=1)
    global_hist = np.bincount(train_labels, minlength=K) / len(train_labels)
    soft = np.where(totals[:, None] > 0, counts / np.maximum(totals, 1.0)[:, None],
                    global_hist[None, :])
    return PredictionSet.from_soft(soft)


def label_prop_predict(g: Graph, train_vertices, train_labels,
                       iterations: int = DEFAULT_LP_ITERATIONS,
                       damping: float = DEFAULT_LP_DAMPING,
                       num_classes=None) -> PredictionSet:
    """Damped label propagation clamped on the training vertices.

    Training vertices start one-hot, the rest uniform; each step mixes the
    neighbor average with the initial state and renormalizes rows. Zero
    iterations returns the initialization.
    """
    train_vertices = np.asarray(train_vertices, dtype=np.int64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if len(train_vertices) == 0:
        raise DataError("label propagation needs a non-empty training set")
    if not 0.0 < damping < 1.0:
        raise DataError(f"damping must be in (0,1), got {damping}")
    if iterations < 0:
        raise DataError("iterations must be >= 0")
    K = _infer_num_classes(g, train_labels, num_classes)

    init = np.full((g.n, K), 1.0 / K)
    init[train_vertices] = 0.0
    init[train_vertices, train_labels] = 1.0

    adj = g.adjacency_csr()
    deg = g.degrees.astype(np.float64)
    inv_deg = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)

    state = init.copy()
    for _ in range(iterations):
        nbr_avg = inv_deg[:, None] * (adj @ state)
        state = damping * nbr_avg + (1.0 - damping) * init
        state[train_vertices] = init[train_vertices]
        state /= state.sum(axis=1, keepdims=True)
    return PredictionSet.from_soft(state)


def load_predictions(path, n: int, K: int) -> PredictionSet:
    """Load a predictions file: one row per vertex, single integers for hard
    labels or K comma-separated probabilities for soft rows.

    Soft rows whose sum is off by at most 1e-6 are renormalized; anything
    further from the simplex is rejected.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            rows.append((lineno, line.split(",")))
    if len(rows) != n:
        raise DataError(f"{path}: expected {n} prediction rows, got {len(rows)}")
    if n == 0:
        return PredictionSet.from_hard(np.empty(0, dtype=np.int64), K)
    arity = len(rows[0][1])
    if arity == 1:
        hard = np.empty(n, dtype=np.int64)
        for idx, (lineno, toks) in enumerate(rows):
            if len(toks) != 1:
                raise DataError(f"{path}:{lineno}: expected a single label")
            try:
                hard[idx] = int(toks[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: expected an integer label, got {toks[0]!r}")
            if not 0 <= hard[idx] < K:
                raise DataError(f"{path}:{lineno}: label {hard[idx]} out of range for K={K}")
        return PredictionSet.from_hard(hard, K)
    if arity != K:
        raise DataError(f"{path}: rows must have 1 or {K} columns, got {arity}")
    soft = np.empty((n, K))
    for idx, (lineno, toks) in enumerate(rows):
        if len(toks) != K:
            raise DataError(f"{path}:{lineno}: expected {K} columns, got {len(toks)}")
        try:
            row = np.asarray([float(t) for t in toks])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric probability")
        if row.min() < 0:
            raise DataError(f"{path}:{lineno}: negative probability")
        s = row.sum()
        if abs(s - 1.0) > 1e-6:
            raise DataError(f"{path}:{lineno}: probabilities sum to {s:.8f}, not 1")
        if abs(s - 1.0) > 1e-12:
            row = row / s
        soft[idx] = row
    return PredictionSet.from_soft(soft)


def save_predictions(preds: PredictionSet, path) -> None:
    """Write a prediction set in the format accepted by load_predictions."""
    if preds.soft is not None:
        lines = (",".join(repr(float(x)) for x in row) for row in preds.soft)
    else:
        lines = (str(int(y)) for y in preds.hard)
    Path(path).write_text("".join(line + "\n" for line in lines))
