"""Evaluation metrics, the experiment runner and result aggregation.

A run walks repetitions x shifts x classifiers x quantifiers x samples in a
fixed order and appends one CSV row per (sample, quantifier); everything is
seeded from the base seed, so reruns of the same config are byte-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .classifiers import enq_predict, label_prop_predict, load_predictions
from .config import (ENQ, EXTERNAL, LABEL_PROP, ClassifierConfig, ExperimentConfig)
from .errors import ConfigError, DataError
from .graph import Graph, load_graph
from .quantifiers import quantify_batch
from .shift import (ShiftSample, generate_sbm, sample_bfs, sample_pps, sample_rw,
                    uniform_split)

SIGNIFICANCE = 0.05

RESULT_FIELDS = ["dataset", "shift", "classifier", "quantifier", "repetition",
                 "sample_id", "sample_size", "ae", "rae", "flags"]


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    shift: str
    classifier: str
    quantifier: str
    repetition: int
    sample_id: int
    sample_size: int
    ae: float | None
    rae: float | None
    flags: tuple[str, ...] = ()


def ae(q, q_hat) -> float:
    """Absolute error: mean componentwise deviation between prevalence vectors."""
    q = np.asarray(q, dtype=np.float64)
    q_hat = np.asarray(q_hat, dtype=np.float64)
    if q.shape != q_hat.shape:
        raise DataError(f"prevalence vectors differ in shape: {q.shape} vs {q_hat.shape}")
    return float(np.abs(q - q_hat).mean())


def rae(q, q_hat, sample_size: int) -> float:
    """Relative absolute error with additive smoothing 1/(2*sample_size).

    Both vectors are smoothed, which keeps the metric defined when a class has
    zero true prevalence in the sample.
    """
    q = np.asarray(q, dtype=np.float64)
    q_hat = np.asarray(q_hat, dtype=np.float64)
    if q.shape != q_hat.shape:
        raise DataError(f"prevalence vectors differ in shape: {q.shape} vs {q_hat.shape}")
    if sample_size <= 0:
        raise DataError("sample_size must be positive")
    eps = 1.0 / (2.0 * sample_size)
    k = len(q)
    q_s = (q + eps) / (1.0 + k * eps)
    q_hat_s = (q_hat + eps) / (1.0 + k * eps)
    return float(np.mean(np.abs(q_s - q_hat_s) / q_s))


def student_t_sf(t: float, dof: float) -> float:
    """Upper tail P(T >= t) of the Student-t distribution, via the regularized
    incomplete beta function."""
    if dof <= 0:
        raise DataError("degrees of freedom must be positive")
    if t == 0.0:
        return 0.5
    x = dof / (dof + t * t)
    tail = 0.5 * float(betainc(dof / 2.0, 0.5, x))
    return tail if t > 0 else 1.0 - tail


def welch_one_sided_pvalue(worse: np.ndarray, best: np.ndarray) -> float:
    """p-value for H1 'mean(worse) > mean(best)' under unequal variances.

    Degenerate inputs (no variance or a single observation) fall back to
    comparing the means directly: equal means cannot be rejected.
    """
    worse = np.asarray(worse, dtype=np.float64)
    best = np.asarray(best, dtype=np.float64)
    n1, n2 = len(worse), len(best)
    mean_diff = worse.mean() - best.mean()
    if n1 < 2 or n2 < 2:
        return 1.0 if mean_diff <= 0 else (0.5 if mean_diff == 0 else 0.0)
    v1 = worse.var(ddof=1) / n1
    v2 = best.var(ddof=1) / n2
    pooled = v1 + v2
    if pooled == 0.0:
        return 0.5 if mean_diff == 0 else (0.0 if mean_diff > 0 else 1.0)
    t = mean_diff / math.sqrt(pooled)
    dof = pooled ** 2 / (v1 ** 2 / (n1 - 1) + v2 ** 2 / (n2 - 1))
    return student_t_sf(t, dof)


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def load_dataset(cfg: ExperimentConfig) -> Graph:
    ds = cfg.dataset
    if ds.sbm is not None:
        return generate_sbm(ds.sbm.blocks, ds.sbm.p_in, ds.sbm.p_out,
                            block_labels=ds.sbm.block_labels, seed=ds.sbm.seed)
    return load_graph(ds.edges, labels_path=ds.labels, features_path=ds.features)


def fit_classifier(cfg: ClassifierConfig, g: Graph, train_vertices, train_labels):
    if cfg.kind == ENQ:
        return enq_predict(g, train_vertices, train_labels)
    if cfg.kind == LABEL_PROP:
        return label_prop_predict(g, train_vertices, train_labels,
                                  iterations=cfg.iterations, damping=cfg.damping)
    if cfg.kind == EXTERNAL:
        return load_predictions(cfg.path, g.n, g.num_classes)
    raise ConfigError(f"unknown classifier kind {cfg.kind!r}")


def draw_samples(shift_cfg, g: Graph, pool_vertices, pool_labels, seed: int,
                 num_classes: int) -> list[ShiftSample]:
    if shift_cfg.kind == "pps":
        return sample_pps(pool_vertices, pool_labels, num_classes,
                          num_dists=shift_cfg.num_dists, n=shift_cfg.n,
                          zipf_exponent=shift_cfg.zipf_exponent, seed=seed)
    if shift_cfg.kind == "bfs":
        return sample_bfs(g, pool_vertices, pool_labels,
                          seeds_per_label=shift_cfg.seeds_per_label, n=shift_cfg.n,
                          seed=seed, num_classes=num_classes)
    if shift_cfg.kind == "rw":
        return sample_rw(g, pool_vertices, pool_labels,
                         seeds_per_label=shift_cfg.seeds_per_label, n=shift_cfg.n,
                         walk_len=shift_cfg.walk_len, alpha=shift_cfg.alpha,
                         seed=seed, num_classes=num_classes)
    raise ConfigError(f"unknown shift kind {shift_cfg.kind!r}")


def run_experiment(cfg: ExperimentConfig, write_csv: bool = True) -> list[ResultRow]:
    """Run the full protocol: split, fit classifiers, draw shifted samples,
    quantify every sample with every quantifier, score against the realized
    sample histogram."""
    g = load_dataset(cfg)
    if g.labels is None:
        raise DataError("experiments need a labeled graph")
    K = g.num_classes
    rows: list[ResultRow] = []
    for rep in range(cfg.repetitions):
        split = uniform_split(g, cfg.fractions, seed=_derive_seed(cfg.seed, 0, rep))
        clf_train = split.classifier_train
        quant_train = split.quantifier_train
        quant_labels = g.labels[quant_train]
        pool = split.test
        pool_labels = g.labels[pool]
        for shift_idx, shift_cfg in enumerate(cfg.shifts):
            samples = draw_samples(shift_cfg, g, pool, pool_labels,
                                   seed=_derive_seed(cfg.seed, 1, rep, shift_idx),
                                   num_classes=K)
            # sanity: ground truth is always the realized histogram
            for s in samples:
                realized = np.bincount(g.labels[s.vertices], minlength=K) / len(s.vertices)
                if not np.array_equal(realized, s.true_prev):
                    raise DataError("sample ground truth does not match its histogram")
            for clf_cfg in cfg.classifiers:
                preds = fit_classifier(clf_cfg, g, clf_train, g.labels[clf_train])
                for quant_cfg in cfg.quantifiers:
                    rows.extend(_score_quantifier(
                        cfg, g, quant_cfg, clf_cfg, shift_cfg, rep, samples,
                        quant_train, quant_labels, preds))
    if write_csv:
        write_results_csv(rows, cfg.output)
    return rows


def _score_quantifier(cfg, g, quant_cfg, clf_cfg, shift_cfg, rep, samples,
                      quant_train, quant_labels, preds) -> list[ResultRow]:
    common = dict(dataset=cfg.dataset.name, shift=shift_cfg.name,
                  classifier=clf_cfg.name, quantifier=quant_cfg.name, repetition=rep)
    try:
        estimates = quantify_batch(quant_cfg.spec, g, quant_train, quant_labels,
                                   [s.vertices for s in samples], preds)
    except Exception as exc:  # record the failure, keep the run going
        return [ResultRow(**common, sample_id=i, sample_size=len(s.vertices),
                          ae=None, rae=None,
                          flags=("error:" + type(exc).__name__,))
                for i, s in enumerate(samples)]
    rows = []
    for i, (s, est) in enumerate(zip(samples, estimates)):
        flags = tuple(est.flags) + (("sample-short",) if s.flagged else ())
        rows.append(ResultRow(**common, sample_id=i, sample_size=len(s.vertices),
                              ae=ae(s.true_prev, est.q),
                              rae=rae(s.true_prev, est.q, len(s.vertices)),
                              flags=flags))
    return rows


def write_results_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RESULT_FIELDS)
        for r in rows:
            writer.writerow([r.dataset, r.shift, r.classifier, r.quantifier,
                             r.repetition, r.sample_id, r.sample_size,
                             "" if r.ae is None else repr(r.ae),
                             "" if r.rae is None else repr(r.rae),
                             ";".join(r.flags)])


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != RESULT_FIELDS:
            raise DataError(f"{path}: unexpected results header {reader.fieldnames}")
        for rec in reader:
            rows.append(ResultRow(
                dataset=rec["dataset"], shift=rec["shift"], classifier=rec["classifier"],
                quantifier=rec["quantifier"], repetition=int(rec["repetition"]),
                sample_id=int(rec["sample_id"]), sample_size=int(rec["sample_size"]),
                ae=float(rec["ae"]) if rec["ae"] else None,
                rae=float(rec["rae"]) if rec["rae"] else None,
                flags=tuple(rec["flags"].split(";")) if rec["flags"] else ()))
    return rows


SUMMARY_FIELDS = ["dataset", "shift", "classifier", "quantifier", "count",
                  "ae_mean", "ae_se", "ae_rank", "ae_best",
                  "rae_mean", "rae_se", "rae_rank", "rae_best"]

RANK_FIELDS = ["quantifier", "ae_avg_rank", "rae_avg_rank", "blocks"]


def aggregate(rows: list[ResultRow]):
    """Summarize result rows.

    Returns (summary, avg_ranks): per (dataset, shift, classifier, quantifier)
    means with standard errors, within-block ranks by mean (ties share the mean
    rank) and a best-equivalence flag from a one-sided Welch t-test against the
    block's best mean; plus per-quantifier ranks averaged over all blocks.
    """
    if not rows:
        raise DataError("no result rows to aggregate")
    scored = [r for r in rows if r.ae is not None and r.rae is not None]
    if not scored:
        raise DataError("no scored result rows to aggregate")
    blocks: dict[tuple, dict[str, list[ResultRow]]] = {}
    for r in scored:
        block = blocks.setdefault((r.dataset, r.shift, r.classifier), {})
        block.setdefault(r.quantifier, []).append(r)
    summary = []
    rank_acc: dict[str, dict[str, list[float]]] = {}
    for block_key in sorted(blocks):
        per_quant = blocks[block_key]
        quant_names = sorted(per_quant)
        stats = {}
        for name in quant_names:
            aes = np.asarray([r.ae for r in per_quant[name]])
            raes = np.asarray([r.rae for r in per_quant[name]])
            stats[name] = (aes, raes)
        ae_means = {n: stats[n][0].mean() for n in quant_names}
        rae_means = {n: stats[n][1].mean() for n in quant_names}
        ae_ranks = _mean_ranks(ae_means, quant_names)
        rae_ranks = _mean_ranks(rae_means, quant_names)
        ae_best = min(quant_names, key=lambda n: (ae_means[n], n))
        rae_best = min(quant_names, key=lambda n: (rae_means[n], n))
        for name in quant_names:
            aes, raes = stats[name]
            summary.append({
                "dataset": block_key[0], "shift": block_key[1], "classifier": block_key[2],
                "quantifier": name, "count": len(aes),
                "ae_mean": float(aes.mean()), "ae_se": _stderr(aes),
                "ae_rank": ae_ranks[name],
                "ae_best": int(welch_one_sided_pvalue(aes, stats[ae_best][0]) >= SIGNIFICANCE),
                "rae_mean": float(raes.mean()), "rae_se": _stderr(raes),
                "rae_rank": rae_ranks[name],
                "rae_best": int(welch_one_sided_pvalue(raes, stats[rae_best][1]) >= SIGNIFICANCE),
            })
            acc = rank_acc.setdefault(name, {"ae": [], "rae": []})
            acc["ae"].append(ae_ranks[name])
            acc["rae"].append(rae_ranks[name])
    avg_ranks = [{"quantifier": name,
                  "ae_avg_rank": float(np.mean(acc["ae"])),
                  "rae_avg_rank": float(np.mean(acc["rae"])),
                  "blocks": len(acc["ae"])}
                 for name, acc in sorted(rank_acc.items())]
    return summary, avg_ranks


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(len(values)))


def _mean_ranks(means: dict[str, float], names: list[str]) -> dict[str, float]:
    """Rank 1 = best (lowest mean); tied means share the mean of their ranks."""
    ordered = sorted(names, key=lambda n: means[n])
    ranks: dict[str, float] = {}
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and means[ordered[j + 1]] == means[ordered[i]]:
            j += 1
        shared = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[ordered[k]] = shared
        i = j + 1
    return ranks


def write_summary_csv(summary: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SUMMARY_FIELDS)
        for rec in summary:
            writer.writerow([_csv_cell(rec[k]) for k in SUMMARY_FIELDS])


def write_ranks_csv(avg_ranks: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(RANK_FIELDS)
        for rec in avg_ranks:
            writer.writerow([_csv_cell(rec[k]) for k in RANK_FIELDS])


def _csv_cell(value):
    return repr(value) if isinstance(value, float) else value
