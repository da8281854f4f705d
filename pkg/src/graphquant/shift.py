"""Shifted test-set samplers, the uniform split protocol, and a synthetic
planted-partition graph generator.

All samplers are pure functions of their seed: the same arguments always
produce identical samples. Ground truth for every sample is the realized
label histogram of the drawn vertices, never the target distribution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .graph import Graph

DEFAULT_SAMPLE_SIZE = 100
DEFAULT_SEEDS_PER_LABEL = 10
DEFAULT_ZIPF_EXPONENT = 1.0
DEFAULT_RW_WALK_LEN = 10
DEFAULT_RW_ALPHA = 0.1
RW_STEP_BUDGET_FACTOR = 1000  # steps allowed per requested sample vertex


@dataclass(frozen=True)
class SplitSpec:
    classifier_train: np.ndarray
    quantifier_train: np.ndarray
    test: np.ndarray


@dataclass(frozen=True)
class ShiftSample:
    vertices: np.ndarray        # sampled vertex ids (duplicates permitted)
    true_prev: np.ndarray       # realized label histogram of the vertices
    sampler: str
    seed: int
    params: dict = field(default_factory=dict)
    start: int | None = None    # seed vertex for BFS/RW samples
    flagged: bool = False       # short sample / exhausted budget


def largest_remainder_counts(total: int, shares) -> np.ndarray:
    """Integer counts summing to `total` that apportion it by the given shares."""
    shares = np.asarray(shares, dtype=np.float64)
    exact = total * shares
    counts = np.floor(exact).astype(np.int64)
    leftover = int(round(total - counts.sum()))
    if leftover > 0:
        remainders = exact - counts
        # ties break to the lowest index: stable argsort on negated remainders
        order = np.argsort(-remainders, kind="stable")
        counts[order[:leftover]] += 1
    return counts


def uniform_split(g: Graph, fractions, seed: int) -> SplitSpec:
    """Seeded uniformly random partition into classifier-train / quantifier-train
    / test at the given fractions (largest-remainder rounding)."""
    fractions = np.asarray(fractions, dtype=np.float64)
    if fractions.shape != (3,) or fractions.min() < 0 or abs(fractions.sum() - 1.0) > 1e-9:
        raise ConfigError(f"fractions must be three non-negatives summing to 1, got {fractions}")
    sizes = largest_remainder_counts(g.n, fractions)
    perm = np.random.default_rng(seed).permutation(g.n)
    c, q = sizes[0], sizes[0] + sizes[1]
    return SplitSpec(classifier_train=np.sort(perm[:c]),
                     quantifier_train=np.sort(perm[c:q]),
                     test=np.sort(perm[q:]))


def _realized_prev(labels_of_sample: np.ndarray, num_classes: int) -> np.ndarray:
    return np.bincount(labels_of_sample, minlength=num_classes) / len(labels_of_sample)


def zipf_distribution(num_classes: int, exponent: float) -> np.ndarray:
    """Zipf mass function over ranks 1..K: q_i proportional to i^-exponent."""
    ranks = np.arange(1, num_classes + 1, dtype=np.float64)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def sample_pps(pool_vertices, pool_labels, num_classes: int, num_dists=None,
               n: int = DEFAULT_SAMPLE_SIZE, zipf_exponent: float = DEFAULT_ZIPF_EXPONENT,
               seed: int = 0) -> list[ShiftSample]:
    """Prior-probability-shift samples: draw target label distributions from a
    Zipf law (random label permutation per draw), then fill per-class quotas by
    uniform sampling without replacement inside each class of the pool.

    If a class cannot fill its quota, the deficit is redistributed to the
    remaining classes proportionally to their targets and the sample is
    flagged if it still comes up short.
    """
    pool_vertices = np.asarray(pool_vertices, dtype=np.int64)
    pool_labels = np.asarray(pool_labels, dtype=np.int64)
    if len(pool_vertices) == 0:
        raise DataError("PPS sampling needs a non-empty pool")
    if num_dists is None:
        num_dists = 10 * num_classes
    base = zipf_distribution(num_classes, zipf_exponent)
    by_class = [pool_vertices[pool_labels == i] for i in range(num_classes)]
    capacity = np.asarray([len(c) for c in by_class])
    samples = []
    for idx in range(num_dists):
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        target = base[rng.permutation(num_classes)]
        counts = largest_remainder_counts(n, target)
        counts = _cap_and_redistribute(counts, capacity, target, n)
        chosen = [rng.choice(by_class[i], size=counts[i], replace=False)
                  for i in range(num_classes) if counts[i] > 0]
        vertices = np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)
        labels = np.repeat(np.arange(num_classes), counts)
        samples.append(ShiftSample(
            vertices=vertices, true_prev=_realized_prev(labels, num_classes),
            sampler="pps", seed=seed,
            params={"sample": idx, "n": n, "zipf_exponent": zipf_exponent,
                    "target": tuple(np.round(target, 12))},
            flagged=len(vertices) < n))
    return samples


def _cap_and_redistribute(counts: np.ndarray, capacity: np.ndarray,
                          target: np.ndarray, requested: int) -> np.ndarray:
    """Cap per-class counts at pool capacity and hand the deficit to classes
    with spare vertices, proportionally to their target shares."""
    counts = np.minimum(counts, capacity)
    deficit = requested - int(counts.sum())
    while deficit > 0:
        spare = capacity - counts
        open_classes = np.nonzero(spare > 0)[0]
        if len(open_classes) == 0:
            break  # pool exhausted; the sample stays short and gets flagged
        shares = target[open_classes]
        if shares.sum() <= 0:
            shares = np.ones(len(open_classes))
        add = largest_remainder_counts(deficit, shares / shares.sum())
        add = np.minimum(add, spare[open_classes])
        counts[open_classes] += add
        deficit = requested - int(counts.sum())
    return counts


def sample_bfs(g: Graph, pool_vertices, pool_labels, seeds_per_label: int = DEFAULT_SEEDS_PER_LABEL,
               n: int = DEFAULT_SAMPLE_SIZE, seed: int = 0, num_classes=None) -> list[ShiftSample]:
    """Breadth-first covariate-shift samples: per label, pick start vertices of
    that label, then collect the first n pool vertices in BFS order from each
    start (each depth level visited in seeded-random order).

    Samples from components with fewer than n pool vertices are shorter and
    flagged; labels absent from the pool are skipped.
    """
    pool_vertices = np.asarray(pool_vertices, dtype=np.int64)
    pool_labels = np.asarray(pool_labels, dtype=np.int64)
    if len(pool_vertices) == 0:
        raise DataError("BFS sampling needs a non-empty pool")
    K = int(num_classes) if num_classes is not None else (
        g.num_classes if g.labels is not None else int(pool_labels.max()) + 1)
    in_pool = np.zeros(g.n, dtype=bool)
    in_pool[pool_vertices] = True
    label_lookup = np.full(g.n, -1, dtype=np.int64)
    label_lookup[pool_vertices] = pool_labels
    samples = []
    idx = 0
    for label in range(K):
        members = pool_vertices[pool_labels == label]
        if len(members) == 0:
            warnings.warn(f"BFS sampler: label {label} absent from the pool, skipped")
            continue
        rng_starts = np.random.default_rng(np.random.SeedSequence([seed, 0, label]))
        starts = rng_starts.choice(members, size=min(seeds_per_label, len(members)),
                                   replace=False)
        for start in starts:
            rng = np.random.default_rng(np.random.SeedSequence([seed, 1, idx]))
            collected = _bfs_collect(g, in_pool, int(start), n, rng)
            labels = label_lookup[collected]
            samples.append(ShiftSample(
                vertices=collected, true_prev=_realized_prev(labels, K),
                sampler="bfs", seed=seed,
                params={"sample": idx, "n": n, "seeds_per_label": seeds_per_label,
                        "label": label},
                start=int(start), flagged=len(collected) < n))
            idx += 1
    return samples


def _bfs_collect(g: Graph, in_pool: np.ndarray, start: int, n: int,
                 rng: np.random.Generator) -> np.ndarray:
    visited = np.zeros(g.n, dtype=bool)
    visited[start] = True
    collected = []
    frontier = [start]
    while frontier and len(collected) < n:
        for v in frontier:
            if in_pool[v]:
                collected.append(v)
                if len(collected) == n:
                    break
        if len(collected) == n:
            break
        nxt = []
        for v in frontier:
            for u in g.neighbors(v):
                if not visited[u]:
                    visited[u] = True
                    nxt.append(u)
        rng.shuffle(nxt)
        frontier = nxt
    return np.asarray(collected, dtype=np.int64)


def sample_rw(g: Graph, pool_vertices, pool_labels, seeds_per_label: int = DEFAULT_SEEDS_PER_LABEL,
              n: int = DEFAULT_SAMPLE_SIZE, walk_len: int = DEFAULT_RW_WALK_LEN,
              alpha: float = DEFAULT_RW_ALPHA, seed: int = 0, num_classes=None) -> list[ShiftSample]:
    """Random-walk covariate-shift samples: per start vertex, run teleporting
    walks of walk_len steps (teleport back to the start with probability alpha)
    until n distinct pool vertices have been visited or the step budget of
    1000*n runs out (then flagged).
    """
    pool_vertices = np.asarray(pool_vertices, dtype=np.int64)
    pool_labels = np.asarray(pool_labels, dtype=np.int64)
    if len(pool_vertices) == 0:
        raise DataError("RW sampling needs a non-empty pool")
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0,1], got {alpha}")
    K = int(num_classes) if num_classes is not None else (
        g.num_classes if g.labels is not None else int(pool_labels.max()) + 1)
    in_pool = np.zeros(g.n, dtype=bool)
    in_pool[pool_vertices] = True
    label_lookup = np.full(g.n, -1, dtype=np.int64)
    label_lookup[pool_vertices] = pool_labels
    samples = []
    idx = 0
    for label in range(K):
        members = pool_vertices[pool_labels == label]
        if len(members) == 0:
            warnings.warn(f"RW sampler: label {label} absent from the pool, skipped")
            continue
        rng_starts = np.random.default_rng(np.random.SeedSequence([seed, 0, label]))
        starts = rng_starts.choice(members, size=min(seeds_per_label, len(members)),
                                   replace=False)
        for start in starts:
            rng = np.random.default_rng(np.random.SeedSequence([seed, 1, idx]))
            collected, flagged = _rw_collect(g, in_pool, int(start), n, walk_len, alpha, rng)
            labels = label_lookup[collected]
            samples.append(ShiftSample(
                vertices=collected, true_prev=_realized_prev(labels, K),
                sampler="rw", seed=seed,
                params={"sample": idx, "n": n, "seeds_per_label": seeds_per_label,
                        "walk_len": walk_len, "alpha": alpha, "label": label},
                start=int(start), flagged=flagged))
            idx += 1
    return samples


def _rw_collect(g: Graph, in_pool: np.ndarray, start: int, n: int, walk_len: int,
                alpha: float, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    seen = set()
    order = []

    def visit(v):
        if in_pool[v] and v not in seen:
            seen.add(v)
            order.append(v)

    visit(start)
    if g.degrees[start] == 0:
        return np.asarray(order, dtype=np.int64), True
    budget = RW_STEP_BUDGET_FACTOR * n
    steps = 0
    flagged = False
    while len(order) < n:
        current = start
        for _ in range(walk_len):
            if steps >= budget:
                flagged = True
                break
            steps += 1
            if rng.random() < alpha:
                current = start
            else:
                nbrs = g.neighbors(current)
                current = int(nbrs[rng.integers(len(nbrs))])
            visit(current)
            if len(order) == n:
                break
        if flagged or len(order) == n:
            break
    return np.asarray(order, dtype=np.int64), flagged or len(order) < n


def generate_sbm(blocks, p_in: float, p_out: float, block_labels=None, seed: int = 0) -> Graph:
    """Planted-partition random graph: intra-block edges with probability p_in,
    inter-block with p_out; vertex labels follow their block (or an explicit
    block-to-label assignment)."""
    blocks = [int(b) for b in blocks]
    if not 0.0 <= p_in <= 1.0 or not 0.0 <= p_out <= 1.0:
        raise ConfigError("p_in and p_out must be in [0,1]")
    if block_labels is None:
        block_labels = list(range(len(blocks)))
    if len(block_labels) != len(blocks):
        raise ConfigError("block_labels must match the number of blocks")
    n = sum(blocks)
    offsets = np.cumsum([0] + blocks)
    labels = np.concatenate([np.full(b, lab, dtype=np.int64)
                             for b, lab in zip(blocks, block_labels)])
    rng = np.random.default_rng(seed)
    edge_chunks = []
    for i in range(len(blocks)):
        for j in range(i, len(blocks)):
            p = p_in if i == j else p_out
            if p == 0.0 or blocks[i] == 0 or blocks[j] == 0:
                continue
            if i == j:
                mask = np.triu(rng.random((blocks[i], blocks[i])) < p, k=1)
            else:
                mask = rng.random((blocks[i], blocks[j])) < p
            us, vs = np.nonzero(mask)
            if len(us):
                edge_chunks.append(np.column_stack([us + offsets[i], vs + offsets[j]]))
    edges = np.concatenate(edge_chunks) if edge_chunks else np.empty((0, 2), dtype=np.int64)
    return Graph.from_edges(n, edges, labels=labels)


def save_samples(samples: list[ShiftSample], path) -> None:
    """Write samples as sections: a header line per sample followed by one
    vertex id per line."""
    lines = []
    for s in samples:
        fields = [f"sampler={s.sampler}", f"seed={s.seed}", f"n={len(s.vertices)}",
                  f"flagged={int(s.flagged)}"]
        if s.start is not None:
            fields.append(f"start={s.start}")
        for key, val in sorted(s.params.items()):
            fields.append(f"{key}={_fmt_param(val)}")
        lines.append(",".join(fields))
        lines.extend(str(int(v)) for v in s.vertices)
    Path(path).write_text("".join(line + "\n" for line in lines))


def _fmt_param(val):
    if isinstance(val, tuple):
        return "|".join(repr(float(x)) for x in val)
    return str(val)


def load_sample_sections(path) -> list[tuple[dict, np.ndarray]]:
    """Parse a samples file back into (header fields, vertex ids) sections."""
    sections = []
    header = None
    vertices: list[int] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if "=" in line:
                if header is not None:
                    sections.append((header, np.asarray(vertices, dtype=np.int64)))
                header = dict(tok.split("=", 1) for tok in line.split(","))
                vertices = []
            else:
                if header is None:
                    raise DataError(f"{path}:{lineno}: vertex id before any sample header")
                try:
                    vertices.append(int(line))
                except ValueError:
                    raise DataError(f"{path}:{lineno}: expected a vertex id, got {line!r}")
    if header is not None:
        sections.append((header, np.asarray(vertices, dtype=np.int64)))
    return sections


def write_manifest(samples: list[ShiftSample], manifest_path, samples_path) -> None:
    """One CSV row per sample of a run, pointing back into the samples file."""
    import csv

    with open(manifest_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["section", "sampler", "seed", "start", "size", "flagged",
                         "params", "file"])
        for i, s in enumerate(samples):
            params = ";".join(f"{k}={_fmt_param(v)}" for k, v in sorted(s.params.items()))
            writer.writerow([i, s.sampler, s.seed,
                             "" if s.start is None else s.start,
                             len(s.vertices), int(s.flagged), params, str(samples_path)])
