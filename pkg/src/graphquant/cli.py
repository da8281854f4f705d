"""Command-line interface.

Subcommands: gen-graph, split, sample-shift, classify, quantify, experiment,
aggregate. Exit codes: 0 success, 1 configuration error, 2 data error,
3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import config as config_mod
from . import harness
from .classifiers import enq_predict, label_prop_predict, save_predictions, load_predictions
from .config import (DEFAULT_FRACTIONS, DEFAULT_LP_DAMPING, DEFAULT_LP_ITERATIONS,
                     load_config, parse_quantifier_spec)
from .errors import ConfigError, DataError
from .graph import Graph, load_graph, save_graph
from .quantifiers import quantify
from .shift import (DEFAULT_RW_ALPHA, DEFAULT_RW_WALK_LEN, DEFAULT_SAMPLE_SIZE,
                    DEFAULT_SEEDS_PER_LABEL, DEFAULT_ZIPF_EXPONENT, SplitSpec,
                    generate_sbm, load_sample_sections, save_samples, uniform_split,
                    write_manifest)

SPLIT_ROLES = ("classifier_train", "quantifier_train", "test")


def _ints(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok != ""]


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok != ""]


def _load_graph_args(args) -> Graph:
    return load_graph(args.edges, labels_path=args.labels, features_path=args.features)


def save_split(split: SplitSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["vertex", "role"])
        for role, vertices in zip(SPLIT_ROLES,
                                  (split.classifier_train, split.quantifier_train, split.test)):
            for v in vertices:
                writer.writerow([int(v), role])


def load_split(path) -> SplitSpec:
    parts: dict[str, list[int]] = {role: [] for role in SPLIT_ROLES}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != ["vertex", "role"]:
            raise DataError(f"{path}: expected header 'vertex,role'")
        for rec in reader:
            role = rec["role"]
            if role not in parts:
                raise DataError(f"{path}: unknown split role {role!r}")
            parts[role].append(int(rec["vertex"]))
    return SplitSpec(*(np.asarray(sorted(parts[role]), dtype=np.int64) for role in SPLIT_ROLES))


def cmd_gen_graph(args) -> int:
    g = generate_sbm(_ints(args.blocks), args.p_in, args.p_out,
                     block_labels=_ints(args.block_labels) if args.block_labels else None,
                     seed=args.seed)
    save_graph(g, args.out_edges, labels_path=args.out_labels)
    print(f"wrote {g.n} vertices, {g.num_edges} edges")
    return 0


def cmd_split(args) -> int:
    g = _load_graph_args(args)
    split = uniform_split(g, _floats(args.fractions), seed=args.seed)
    save_split(split, args.out)
    sizes = [len(split.classifier_train), len(split.quantifier_train), len(split.test)]
    print(f"split sizes: {sizes}")
    return 0


def cmd_sample_shift(args) -> int:
    g = _load_graph_args(args)
    if g.labels is None:
        raise DataError("shift sampling needs a labels file")
    split = load_split(args.split)
    pool = split.test
    shift_cfg = config_mod.ShiftConfig(
        name=args.kind, kind=args.kind, n=args.n,
        num_dists=args.num_dists, zipf_exponent=args.zipf_exponent,
        seeds_per_label=args.seeds_per_label, walk_len=args.walk_len, alpha=args.alpha)
    samples = harness.draw_samples(shift_cfg, g, pool, g.labels[pool],
                                   seed=args.seed, num_classes=g.num_classes)
    save_samples(samples, args.out)
    write_manifest(samples, args.manifest, args.out)
    print(f"wrote {len(samples)} samples")
    return 0


def cmd_classify(args) -> int:
    g = _load_graph_args(args)
    if g.labels is None:
        raise DataError("classification needs a labels file")
    split = load_split(args.split)
    train = split.classifier_train
    if args.variant == "enq":
        preds = enq_predict(g, train, g.labels[train])
    else:
        preds = label_prop_predict(g, train, g.labels[train],
                                   iterations=args.iterations, damping=args.damping)
    save_predictions(preds, args.out)
    print(f"wrote predictions for {preds.n} vertices")
    return 0


def cmd_quantify(args) -> int:
    g = _load_graph_args(args)
    if g.labels is None:
        raise DataError("quantification needs a labels file")
    split = load_split(args.split)
    train = split.quantifier_train
    preds = load_predictions(args.preds, g.n, g.num_classes) if args.preds else None
    spec = parse_quantifier_spec(yaml.safe_load(args.quantifier) or {})
    if args.sample_index is not None:
        sections = load_sample_sections(args.test)
        if not 0 <= args.sample_index < len(sections):
            raise DataError(f"sample index {args.sample_index} out of range "
                            f"({len(sections)} samples in {args.test})")
        test_vertices = sections[args.sample_index][1]
    else:
        text = Path(args.test).read_text(encoding="utf-8")
        test_vertices = np.asarray([int(line) for line in text.split() if line],
                                   dtype=np.int64)
    est = quantify(spec, g, train, g.labels[train], test_vertices, preds)
    payload = {"quantifier": spec.name, "K": est.K,
               "prevalences": [float(x) for x in est.q],
               "flags": list(est.flags), "test_size": int(len(test_vertices))}
    out = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)
    return 0


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg = config_mod.ExperimentConfig(
            dataset=cfg.dataset, classifiers=cfg.classifiers, quantifiers=cfg.quantifiers,
            shifts=cfg.shifts, fractions=cfg.fractions, repetitions=cfg.repetitions,
            seed=cfg.seed, output=args.out)
    rows = harness.run_experiment(cfg)
    print(f"wrote {len(rows)} result rows to {cfg.output}")
    return 0


def cmd_aggregate(args) -> int:
    rows = harness.read_results_csv(args.results)
    summary, avg_ranks = harness.aggregate(rows)
    harness.write_summary_csv(summary, args.out)
    ranks_out = args.ranks_out or str(Path(args.out).with_suffix("")) + "_ranks.csv"
    harness.write_ranks_csv(avg_ranks, ranks_out)
    print(f"wrote {len(summary)} summary rows to {args.out} and ranks to {ranks_out}")
    return 0


def _add_graph_args(p, features=True):
    p.add_argument("--edges", required=True, help="edge file (one 'u v' per line)")
    p.add_argument("--labels", help="labels file (one integer per line)")
    if features:
        p.add_argument("--features", help="features file (comma-separated rows)")
    else:
        p.set_defaults(features=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphquant",
                                     description="Graph quantification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a planted-partition graph")
    p.add_argument("--blocks", required=True, help="comma-separated block sizes")
    p.add_argument("--p-in", type=float, required=True, dest="p_in")
    p.add_argument("--p-out", type=float, required=True, dest="p_out")
    p.add_argument("--block-labels", help="comma-separated label per block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-labels", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("split", help="uniform split into train/train/test")
    _add_graph_args(p)
    p.add_argument("--fractions", default=",".join(str(f) for f in DEFAULT_FRACTIONS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("sample-shift", help="draw shifted test samples from the test partition")
    _add_graph_args(p)
    p.add_argument("--split", required=True)
    p.add_argument("--kind", choices=["pps", "bfs", "rw"], required=True)
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLE_SIZE)
    p.add_argument("--num-dists", type=int, dest="num_dists",
                   help="PPS target distributions (default 10*K)")
    p.add_argument("--zipf-exponent", type=float, default=DEFAULT_ZIPF_EXPONENT,
                   dest="zipf_exponent")
    p.add_argument("--seeds-per-label", type=int, default=DEFAULT_SEEDS_PER_LABEL,
                   dest="seeds_per_label")
    p.add_argument("--walk-len", type=int, default=DEFAULT_RW_WALK_LEN, dest="walk_len")
    p.add_argument("--alpha", type=float, default=DEFAULT_RW_ALPHA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_sample_shift)

    p = sub.add_parser("classify", help="run a built-in classifier, write predictions")
    _add_graph_args(p)
    p.add_argument("--split", required=True)
    p.add_argument("--variant", choices=["enq", "label-prop"], default="enq")
    p.add_argument("--iterations", type=int, default=DEFAULT_LP_ITERATIONS)
    p.add_argument("--damping", type=float, default=DEFAULT_LP_DAMPING)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("quantify", help="estimate prevalences of one test sample")
    _add_graph_args(p)
    p.add_argument("--split", required=True)
    p.add_argument("--preds", help="predictions file (not needed for mlpe)")
    p.add_argument("--quantifier", default="{base: acc}",
                   help="YAML quantifier spec, e.g. '{base: acc, nacc: true}'")
    p.add_argument("--test", required=True,
                   help="vertex-id file, or a samples file with --sample-index")
    p.add_argument("--sample-index", type=int, dest="sample_index")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_quantify)

    p = sub.add_parser("experiment", help="run a full experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the configured output CSV")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("aggregate", help="summarize a results CSV")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ranks-out", dest="ranks_out")
    p.set_defaults(func=cmd_aggregate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
