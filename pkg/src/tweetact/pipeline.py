"""End-to-end pipeline: adjudicate -> normalize -> split -> augment ->
classify -> fuse -> evaluate.

Every stage reads its inputs from files in the output directory and writes
its own artifacts there, so a run can be resumed from any stage and a
failure at stage k never touches the artifacts of stages before k. All
randomness flows from config seeds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from . import io
from .augment import apply_plan, balance_plan, stub_insert
from .backends import BackendDescriptor, backend_inserter, classify_batch
from .dataset import (
    LabeledDataset,
    SpeechActTaxonomy,
    adjudicate_dataset,
    class_distribution,
    stratified_split,
)
from .ensemble import argmax_labels, fuse
from .errors import StageError, TweetActError
from .metrics import build_report, confusion
from .normalize import NormalizationConfig, normalize_dataset
from .rng import derive_seed
from .version import VERSION

STAGES = ("adjudicate", "normalize", "split", "augment", "classify", "fuse", "evaluate")

# Documented exit codes: 0 success, 2 config/usage, then one per stage.
STAGE_EXIT_CODES = {
    "config": 2,
    "adjudicate": 3,
    "normalize": 4,
    "split": 5,
    "augment": 6,
    "classify": 7,
    "fuse": 8,
    "evaluate": 9,
}

ARTIFACTS = {
    "adjudicated": "adjudicated.jsonl",
    "adjudication_report": "adjudication.json",
    "normalized": "normalized.jsonl",
    "train": "train.jsonl",
    "test": "test.jsonl",
    "split_manifest": "split_manifest.json",
    "train_final": "train_final.jsonl",
    "test_final": "test_final.jsonl",
    "augment_plan": "augment_plan.json",
    "predictions": "predictions.tsv",
    "report": "report.json",
    "confusion": "confusion.csv",
    "manifest": "manifest.json",
}


def _require_type(value, types, what: str):
    if isinstance(value, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ValueError(f"{what} must not be a boolean")
    if not isinstance(value, types):
        raise ValueError(f"{what} has wrong type: {value!r}")
    return value


@dataclass(frozen=True)
class SplitSettings:
    ratio: float = 0.2
    seed: int = 42
    exact_total: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "SplitSettings":
        ratio = float(_require_type(data.get("ratio", 0.2), (int, float), "split.ratio"))
        seed = _require_type(data.get("seed", 42), int, "split.seed")
        exact = _require_type(data.get("exact_total", False), bool, "split.exact_total")
        if not 0.0 < ratio < 1.0:
            raise ValueError(f"split.ratio must be in (0, 1), got {ratio}")
        return cls(ratio=ratio, seed=seed, exact_total=exact)


@dataclass(frozen=True)
class AugmentSettings:
    enabled: bool = False
    train_only: bool = False
    seed: int = 0
    backend: BackendDescriptor = BackendDescriptor(kind="stub")
    top_k: int = 5

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentSettings":
        enabled = _require_type(data.get("enabled", False), bool, "augmentation.enabled")
        train_only = _require_type(
            data.get("train_only", False), bool, "augmentation.train_only"
        )
        seed = _require_type(data.get("seed", 0), int, "augmentation.seed")
        top_k = _require_type(data.get("top_k", 5), int, "augmentation.top_k")
        backend = BackendDescriptor.from_dict(data.get("backend", {"kind": "stub"}))
        if backend.kind == "file":
            raise ValueError("augmentation backend must be stub or http")
        return cls(
            enabled=enabled, train_only=train_only, seed=seed, backend=backend, top_k=top_k
        )


@dataclass(frozen=True)
class PipelineConfig:
    """Validated run configuration.

    Loaded from a flat JSON file; relative paths are resolved against the
    config file's directory.
    """

    input: Path
    out_dir: Path
    taxonomy: SpeechActTaxonomy
    backends: Tuple[BackendDescriptor, ...]
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    adjudicate: bool = True
    split: SplitSettings = field(default_factory=SplitSettings)
    augmentation: AugmentSettings = field(default_factory=AugmentSettings)
    weights: Optional[Tuple[float, ...]] = None
    config_hash: str = ""

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path = Path(".")) -> "PipelineConfig":
        for key in ("input", "out_dir", "classes", "backends"):
            if key not in data:
                raise ValueError(f"config is missing {key!r}")
        classes = data["classes"]
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise ValueError("classes must be a list of strings")
        taxonomy = SpeechActTaxonomy(tuple(classes))
        raw_backends = data["backends"]
        if not isinstance(raw_backends, list) or not raw_backends:
            raise ValueError("backends must be a non-empty list")
        backends = []
        for entry in raw_backends:
            descriptor = BackendDescriptor.from_dict(entry)
            if descriptor.kind == "file":
                location = Path(descriptor.location)
                if not location.is_absolute():
                    descriptor = BackendDescriptor(
                        kind="file",
                        location=str(base_dir / location),
                        model_id=descriptor.model_id,
                    )
            backends.append(descriptor)
        weights = data.get("weights")
        if weights is not None:
            if not isinstance(weights, list) or len(weights) != len(backends):
                raise ValueError(
                    f"weights must list one value per backend ({len(backends)})"
                )
            weights = tuple(
                float(_require_type(w, (int, float), "weights entry")) for w in weights
            )
            if any(w <= 0 for w in weights):
                raise ValueError("weights must be strictly positive")
        normalization = NormalizationConfig.from_dict(data.get("normalization", {}))
        adjudicate = _require_type(data.get("adjudicate", True), bool, "adjudicate")
        return cls(
            input=_resolve(base_dir, _require_type(data["input"], str, "input")),
            out_dir=_resolve(base_dir, _require_type(data["out_dir"], str, "out_dir")),
            taxonomy=taxonomy,
            backends=tuple(backends),
            normalization=normalization,
            adjudicate=adjudicate,
            split=SplitSettings.from_dict(data.get("split", {})),
            augmentation=AugmentSettings.from_dict(data.get("augmentation", {})),
            weights=tuple(weights) if weights is not None else None,
            config_hash=io.sha256_text(io.canonical_json(data)),
        )


def _resolve(base_dir: Path, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base_dir / p


def load_config(path) -> PipelineConfig:
    path = Path(path)
    return PipelineConfig.from_dict(io.load_json(path), base_dir=path.parent)


@dataclass
class RunManifest:
    config_hash: str
    input_digests: Dict[str, str]
    stage_counts: Dict[str, Dict[str, int]]
    version: str
    started_at: str
    finished_at: str

    def as_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "input_digests": dict(self.input_digests),
            "stage_counts": {k: dict(v) for k, v in self.stage_counts.items()},
            "version": self.version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text) or "model"


def probs_filename(index: int, descriptor: BackendDescriptor) -> str:
    return f"probs_{index:02d}_{_slug(descriptor.model_id or descriptor.kind)}.csv"


def _check_inputs(config: PipelineConfig) -> None:
    if not config.input.exists():
        raise FileNotFoundError(f"input file not found: {config.input}")
    for descriptor in config.backends:
        if descriptor.kind == "file" and not Path(descriptor.location).exists():
            raise FileNotFoundError(
                f"file backend CSV not found: {descriptor.location}"
            )


def _stage_adjudicate(config: PipelineConfig, out: Path) -> None:
    tweets = io.read_raw_tweets(config.input)
    if config.adjudicate:
        labeled, report = adjudicate_dataset(tweets, config.taxonomy)
        io.write_raw_tweets(out / ARTIFACTS["adjudicated"], labeled.items)
        io.save_json(out / ARTIFACTS["adjudication_report"], report.as_dict())
        return
    for tweet in tweets:
        if tweet.label is None:
            raise ValueError(
                f"tweet {tweet.id!r} has no label and adjudication is disabled"
            )
        config.taxonomy.index(tweet.label)
    io.write_raw_tweets(out / ARTIFACTS["adjudicated"], tweets)
    io.save_json(
        out / ARTIFACTS["adjudication_report"],
        {
            "total_in": len(tweets),
            "retained": len(tweets),
            "excluded_ids": [],
            "per_class_counts": class_distribution(
                LabeledDataset(config.taxonomy, tweets)
            ).as_dict(),
        },
    )


def _stage_normalize(config: PipelineConfig, out: Path) -> None:
    tweets = io.read_raw_tweets(out / ARTIFACTS["adjudicated"])
    normalized = normalize_dataset(tweets, config.normalization)
    io.write_normalized_tweets(out / ARTIFACTS["normalized"], normalized)


def _stage_split(config: PipelineConfig, out: Path) -> None:
    dataset = io.read_labeled_dataset(out / ARTIFACTS["normalized"], config.taxonomy)
    result = stratified_split(
        dataset,
        test_ratio=config.split.ratio,
        seed=config.split.seed,
        exact_total=config.split.exact_total,
    )
    io.write_normalized_tweets(out / ARTIFACTS["train"], result.train.items)
    io.write_normalized_tweets(out / ARTIFACTS["test"], result.test.items)
    adjudication = io.load_json(out / ARTIFACTS["adjudication_report"])
    manifest = result.manifest()
    manifest["excluded_ids"] = adjudication.get("excluded_ids", [])
    io.save_json(out / ARTIFACTS["split_manifest"], manifest)


def _stage_augment(config: PipelineConfig, out: Path) -> None:
    settings = config.augmentation
    plan_info: dict = {
        "enabled": settings.enabled,
        "train_only": settings.train_only,
        "seed": settings.seed,
    }
    for side, augmented_name, side_seed in (
        ("train", "train_final", settings.seed),
        ("test", "test_final", derive_seed(settings.seed, 1)),
    ):
        dataset = io.read_labeled_dataset(out / ARTIFACTS[side], config.taxonomy)
        augment_this_side = settings.enabled and not (
            settings.train_only and side == "test"
        )
        if augment_this_side:
            plan = balance_plan(class_distribution(dataset))
            if settings.backend.kind == "stub":
                inserter = stub_insert
            else:
                inserter = backend_inserter(settings.backend, settings.top_k)
            dataset = apply_plan(dataset, plan, inserter, side_seed)
            plan_info[f"{side}_deficits"] = plan.as_dict()
        else:
            plan_info[f"{side}_deficits"] = {}
        io.write_normalized_tweets(out / ARTIFACTS[augmented_name], dataset.items)
    io.save_json(out / ARTIFACTS["augment_plan"], plan_info)


def _stage_classify(config: PipelineConfig, out: Path) -> None:
    tweets = io.read_normalized_tweets(out / ARTIFACTS["test_final"])
    texts = [tweet.text for tweet in tweets]
    ids = [tweet.id for tweet in tweets]
    for index, descriptor in enumerate(config.backends):
        matrix = classify_batch(texts, descriptor, config.taxonomy, ids=ids)
        io.write_probability_matrix(out / probs_filename(index, descriptor), matrix)


def _stage_fuse(config: PipelineConfig, out: Path) -> None:
    matrices = [
        io.read_probability_matrix(out / probs_filename(index, descriptor))
        for index, descriptor in enumerate(config.backends)
    ]
    fused = fuse(matrices, config.weights)
    predictions = argmax_labels(fused, config.taxonomy, ids=matrices[0].ids)
    io.write_predictions(out / ARTIFACTS["predictions"], predictions, config.taxonomy)


def _stage_evaluate(config: PipelineConfig, out: Path) -> None:
    gold = io.read_labeled_dataset(out / ARTIFACTS["test_final"], config.taxonomy)
    predictions = io.read_predictions(out / ARTIFACTS["predictions"])
    cm = confusion(
        [item.label for item in gold.items],
        [label for _, label, _ in predictions],
        config.taxonomy,
        gold_ids=[item.id for item in gold.items],
        pred_ids=[id_ for id_, _, _ in predictions],
    )
    report = build_report(cm)
    io.save_json(out / ARTIFACTS["report"], report.to_dict())
    with open(out / ARTIFACTS["confusion"], "w", encoding="utf-8") as handle:
        handle.write("gold," + ",".join(config.taxonomy.classes) + "\n")
        for c, name in enumerate(config.taxonomy.classes):
            row = ",".join(str(int(v)) for v in cm.counts[c])
            handle.write(f"{name},{row}\n")


_STAGE_RUNNERS = {
    "adjudicate": _stage_adjudicate,
    "normalize": _stage_normalize,
    "split": _stage_split,
    "augment": _stage_augment,
    "classify": _stage_classify,
    "fuse": _stage_fuse,
    "evaluate": _stage_evaluate,
}


def _count_rows(path: Path) -> int:
    with open(path, "r", encoding="utf-8") as handle:
        return sum(1 for line in handle if line.strip())


def _collect_counts(config: PipelineConfig, out: Path) -> Dict[str, Dict[str, int]]:
    adjudication = io.load_json(out / ARTIFACTS["adjudication_report"])
    report = io.load_json(out / ARTIFACTS["report"])
    evaluated = sum(entry["support"] for entry in report["per_class"].values())
    return {
        "adjudicate": {
            "in": int(adjudication["total_in"]),
            "retained": int(adjudication["retained"]),
            "excluded": len(adjudication["excluded_ids"]),
        },
        "normalize": {"out": _count_rows(out / ARTIFACTS["normalized"])},
        "split": {
            "train": _count_rows(out / ARTIFACTS["train"]),
            "test": _count_rows(out / ARTIFACTS["test"]),
        },
        "augment": {
            "train": _count_rows(out / ARTIFACTS["train_final"]),
            "test": _count_rows(out / ARTIFACTS["test_final"]),
        },
        "classify": {
            "rows": _count_rows(out / ARTIFACTS["test_final"]),
            "models": len(config.backends),
        },
        "fuse": {"predictions": _count_rows(out / ARTIFACTS["predictions"])},
        "evaluate": {"total": int(evaluated)},
    }


def run_pipeline(config: PipelineConfig, from_stage: Optional[str] = None) -> RunManifest:
    """Run all stages (or resume at ``from_stage``) and write a manifest.

    Raises StageError naming the failing stage; artifacts of earlier stages
    are left untouched. Config problems (missing inputs, bad stage name)
    raise before stage 1 runs.
    """
    started = _now()
    if from_stage is not None and from_stage not in STAGES:
        raise ValueError(f"unknown stage {from_stage!r}; expected one of {STAGES}")
    _check_inputs(config)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    start = STAGES.index(from_stage) if from_stage else 0
    for stage in STAGES[start:]:
        try:
            _STAGE_RUNNERS[stage](config, out)
        except (TweetActError, OSError, ValueError, KeyError) as exc:
            raise StageError(stage, exc) from exc
    digests = {str(config.input): io.sha256_file(config.input)}
    for descriptor in config.backends:
        if descriptor.kind == "file":
            digests[descriptor.location] = io.sha256_file(descriptor.location)
    manifest = RunManifest(
        config_hash=config.config_hash,
        input_digests=digests,
        stage_counts=_collect_counts(config, out),
        version=VERSION,
        started_at=started,
        finished_at=_now(),
    )
    io.save_json(out / ARTIFACTS["manifest"], manifest.as_dict())
    return manifest
