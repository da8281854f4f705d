"""Experiment configuration: YAML schema, parsing and validation.

Top-level keys: dataset, split, classifiers, quantifiers, shifts,
repetitions, seed, output. See the README for the full schema and the
package defaults.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from . import kernels, shift
from .classifiers import DEFAULT_LP_DAMPING, DEFAULT_LP_ITERATIONS
from .errors import ConfigError
from .kernels import KernelSpec
from .quantifiers import QuantifierSpec

DEFAULT_FRACTIONS = (0.05, 0.15, 0.80)

ENQ = "enq"
LABEL_PROP = "label_prop"
EXTERNAL = "external"


@dataclass(frozen=True)
class SbmParams:
    blocks: tuple[int, ...]
    p_in: float
    p_out: float
    block_labels: tuple[int, ...] | None = None
    seed: int = 0


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    edges: str | None = None
    labels: str | None = None
    features: str | None = None
    sbm: SbmParams | None = None


@dataclass(frozen=True)
class ClassifierConfig:
    name: str
    kind: str
    iterations: int = DEFAULT_LP_ITERATIONS
    damping: float = DEFAULT_LP_DAMPING
    path: str | None = None


@dataclass(frozen=True)
class QuantifierConfig:
    name: str
    spec: QuantifierSpec


@dataclass(frozen=True)
class ShiftConfig:
    name: str
    kind: str  # pps | bfs | rw
    n: int = shift.DEFAULT_SAMPLE_SIZE
    num_dists: int | None = None
    zipf_exponent: float = shift.DEFAULT_ZIPF_EXPONENT
    seeds_per_label: int = shift.DEFAULT_SEEDS_PER_LABEL
    walk_len: int = shift.DEFAULT_RW_WALK_LEN
    alpha: float = shift.DEFAULT_RW_ALPHA


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    classifiers: tuple[ClassifierConfig, ...]
    quantifiers: tuple[QuantifierConfig, ...]
    shifts: tuple[ShiftConfig, ...]
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    repetitions: int = 1
    seed: int = 0
    output: str = "results.csv"

    def __post_init__(self):
        if len(self.quantifiers) == 0:
            raise ConfigError("config needs at least one quantifier")
        if len(self.shifts) == 0:
            raise ConfigError("config needs at least one shift spec")
        if len(self.classifiers) == 0:
            raise ConfigError("config needs at least one classifier")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        names = [q.name for q in self.quantifiers]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate quantifier names in {names}")


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return parse_config(raw, base_dir=Path(path).parent)


def parse_config(raw: dict, base_dir=None) -> ExperimentConfig:
    base_dir = Path(base_dir) if base_dir is not None else Path(".")

    def resolve(p):
        return None if p is None else str((base_dir / p) if not Path(p).is_absolute() else Path(p))

    dataset = _parse_dataset(_require(raw, "dataset"), resolve)
    split = raw.get("split", {}) or {}
    fractions = tuple(split.get("fractions", DEFAULT_FRACTIONS))
    if len(fractions) != 3:
        raise ConfigError(f"split fractions must have 3 entries, got {fractions}")
    classifiers = tuple(_parse_classifier(c, i, resolve)
                        for i, c in enumerate(_require(raw, "classifiers")))
    quantifiers = tuple(_parse_quantifier(q, i) for i, q in enumerate(_require(raw, "quantifiers")))
    shifts = tuple(_parse_shift(s, i) for i, s in enumerate(_require(raw, "shifts")))
    return ExperimentConfig(
        dataset=dataset, classifiers=classifiers, quantifiers=quantifiers, shifts=shifts,
        fractions=fractions, repetitions=int(raw.get("repetitions", 1)),
        seed=int(raw.get("seed", 0)), output=resolve(raw.get("output", "results.csv")))


def _require(raw: dict, key: str):
    if key not in raw or raw[key] is None:
        raise ConfigError(f"config is missing required key {key!r}")
    return raw[key]


def _parse_dataset(raw: dict, resolve) -> DatasetConfig:
    if not isinstance(raw, dict):
        raise ConfigError("dataset must be a mapping")
    name = raw.get("name", "dataset")
    sbm = None
    if "sbm" in raw and raw["sbm"] is not None:
        s = raw["sbm"]
        try:
            sbm = SbmParams(blocks=tuple(int(b) for b in s["blocks"]),
                            p_in=float(s["p_in"]), p_out=float(s["p_out"]),
                            block_labels=tuple(s["block_labels"]) if s.get("block_labels") else None,
                            seed=int(s.get("seed", 0)))
        except KeyError as exc:
            raise ConfigError(f"sbm config is missing {exc}")
    edges = resolve(raw.get("edges"))
    if sbm is None and edges is None:
        raise ConfigError("dataset needs either file paths or sbm parameters")
    if sbm is None and raw.get("labels") is None:
        raise ConfigError("file-based datasets need a labels file")
    return DatasetConfig(name=name, edges=edges, labels=resolve(raw.get("labels")),
                         features=resolve(raw.get("features")), sbm=sbm)


def _parse_classifier(raw: dict, index: int, resolve) -> ClassifierConfig:
    kind = raw.get("kind")
    if kind not in (ENQ, LABEL_PROP, EXTERNAL):
        raise ConfigError(f"classifier #{index}: unknown kind {kind!r}")
    name = raw.get("name", kind)
    if kind == EXTERNAL and not raw.get("path"):
        raise ConfigError(f"classifier {name!r}: external classifiers need a path")
    damping = float(raw.get("damping", DEFAULT_LP_DAMPING))
    if kind == LABEL_PROP and not 0.0 < damping < 1.0:
        raise ConfigError(f"classifier {name!r}: damping must be in (0,1)")
    return ClassifierConfig(name=name, kind=kind,
                            iterations=int(raw.get("iterations", DEFAULT_LP_ITERATIONS)),
                            damping=damping, path=resolve(raw.get("path")))


def parse_kernel_spec(raw) -> KernelSpec:
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"kernel spec must name a kind, got {raw!r}")
    kind = raw["kind"]
    if kind == kernels.CONSTANT:
        return KernelSpec.constant()
    if kind == kernels.PPR:
        return KernelSpec.ppr(
            alpha=float(raw.get("alpha", kernels.DEFAULT_ALPHA)),
            walk_len=int(raw.get("walk_len", kernels.DEFAULT_WALK_LEN)),
            interp=float(raw.get("interp", kernels.DEFAULT_INTERP)),
            mode=raw.get("mode", kernels.DENSE),
            prune_threshold=float(raw.get("prune_threshold", 0.0)))
    if kind == kernels.SHORTEST_PATH:
        return KernelSpec.shortest_path(gamma=float(raw.get("gamma", kernels.DEFAULT_GAMMA)))
    if kind == kernels.FEATURE:
        return KernelSpec.feature()
    raise ConfigError(f"unknown kernel kind {kind!r}")


def parse_quantifier_spec(raw: dict) -> QuantifierSpec:
    base = raw.get("base", "acc")
    return QuantifierSpec(
        base=base,
        probabilistic=bool(raw.get("probabilistic", False)),
        nacc=bool(raw.get("nacc", False)),
        kernel_q=parse_kernel_spec(raw.get("kernel_q")),
        kernel_p=parse_kernel_spec(raw.get("kernel_p")))


def _parse_quantifier(raw: dict, index: int) -> QuantifierConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"quantifier #{index} must be a mapping")
    spec = parse_quantifier_spec(raw)
    return QuantifierConfig(name=raw.get("name", spec.name), spec=spec)


def _parse_shift(raw: dict, index: int) -> ShiftConfig:
    kind = raw.get("kind")
    if kind not in ("pps", "bfs", "rw"):
        raise ConfigError(f"shift #{index}: unknown kind {kind!r}")
    num_dists = raw.get("num_dists")
    return ShiftConfig(
        name=raw.get("name", kind), kind=kind,
        n=int(raw.get("n", shift.DEFAULT_SAMPLE_SIZE)),
        num_dists=None if num_dists is None else int(num_dists),
        zipf_exponent=float(raw.get("zipf_exponent", shift.DEFAULT_ZIPF_EXPONENT)),
        seeds_per_label=int(raw.get("seeds_per_label", shift.DEFAULT_SEEDS_PER_LABEL)),
        walk_len=int(raw.get("walk_len", shift.DEFAULT_RW_WALK_LEN)),
        alpha=float(raw.get("alpha", shift.DEFAULT_RW_ALPHA)))
