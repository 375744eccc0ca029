"""Taxonomy, annotation adjudication, class statistics, merging, splitting."""

from __future__ import annotations

import dataclasses
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    DuplicateId,
    EmptyClassWarning,
    MissingVotes,
    UnknownLabel,
)
from .rng import SplitMix64

# Index into SpeechActTaxonomy.classes.
SpeechActLabel = int

DEFAULT_CLASSES = (
    "Expression",
    "Question",
    "Request",
    "Assertion",
    "Recommendation",
    "Miscellaneous",
)


@dataclass(frozen=True)
class SpeechActTaxonomy:
    """Ordered class list; the order fixes probability-matrix columns and
    argmax tie-breaking for the lifetime of a run."""

    classes: Tuple[str, ...] = DEFAULT_CLASSES

    def __post_init__(self) -> None:
        object.__setattr__(self, "classes", tuple(self.classes))
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("taxonomy class names must be unique")
        if not self.classes:
            raise ValueError("taxonomy must have at least one class")

    def __len__(self) -> int:
        return len(self.classes)

    def index(self, name: str) -> SpeechActLabel:
        try:
            return self.classes.index(name)
        except ValueError:
            raise UnknownLabel(f"label {name!r} not in taxonomy {list(self.classes)}") from None

    def name(self, label: SpeechActLabel) -> str:
        return self.classes[label]


@dataclass
class LabeledDataset:
    """A taxonomy plus labeled items (normalized tweets in the standard flow).

    Items need ``id`` and ``label`` attributes; every label must name a
    taxonomy class and ids must be unique.
    """

    taxonomy: SpeechActTaxonomy
    items: List = field(default_factory=list)

    def __post_init__(self) -> None:
        seen = set()
        valid = set(self.taxonomy.classes)
        for item in self.items:
            if item.id in seen:
                raise DuplicateId(f"duplicate item id {item.id!r}")
            seen.add(item.id)
            if item.label not in valid:
                raise UnknownLabel(f"item {item.id!r} has label {item.label!r} outside taxonomy")

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class ClassDistribution:
    class_names: Tuple[str, ...]
    counts: Tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.class_names, self.counts))


@dataclass
class AdjudicationReport:
    excluded_ids: List[str]
    per_class_counts: ClassDistribution
    total_in: int

    @property
    def retained(self) -> int:
        return self.per_class_counts.total

    def as_dict(self) -> dict:
        return {
            "total_in": self.total_in,
            "retained": self.retained,
            "excluded_ids": list(self.excluded_ids),
            "per_class_counts": self.per_class_counts.as_dict(),
        }


@dataclass
class SplitResult:
    train: LabeledDataset
    test: LabeledDataset
    seed: int
    test_ratio: float

    def manifest(self) -> dict:
        taxonomy = self.train.taxonomy
        return {
            "seed": self.seed,
            "test_ratio": self.test_ratio,
            "train_counts": class_distribution(self.train).as_dict(),
            "test_counts": class_distribution(self.test).as_dict(),
            "classes": list(taxonomy.classes),
        }


def adjudicate(votes: Sequence[str], taxonomy: SpeechActTaxonomy) -> Optional[SpeechActLabel]:
    """Majority vote over exactly three annotator labels.

    Returns the winning class index, or None when all three votes differ
    (the tweet is excluded). Vote order never matters.
    """
    if votes is None or len(votes) != 3:
        raise MissingVotes(f"expected exactly 3 votes, got {votes!r}")
    indices = [taxonomy.index(v) for v in votes]
    (winner, count), = Counter(indices).most_common(1)
    return winner if count >= 2 else None


def adjudicate_dataset(
    tweets: Sequence, taxonomy: SpeechActTaxonomy
) -> Tuple[LabeledDataset, AdjudicationReport]:
    """Resolve votes into labels; tweets with three-way disagreement are
    dropped and reported."""
    counts = [0] * len(taxonomy)
    excluded: List[str] = []
    items: List = []
    for tweet in tweets:
        winner = adjudicate(tweet.votes, taxonomy)
        if winner is None:
            excluded.append(tweet.id)
            continue
        counts[winner] += 1
        items.append(dataclasses.replace(tweet, label=taxonomy.name(winner)))
    report = AdjudicationReport(
        excluded_ids=excluded,
        per_class_counts=ClassDistribution(taxonomy.classes, tuple(counts)),
        total_in=len(tweets),
    )
    return LabeledDataset(taxonomy, items), report


def class_distribution(dataset: LabeledDataset) -> ClassDistribution:
    counts = [0] * len(dataset.taxonomy)
    for item in dataset.items:
        counts[dataset.taxonomy.index(item.label)] += 1
    return ClassDistribution(dataset.taxonomy.classes, tuple(counts))


def merge_classes(dataset: LabeledDataset, merge_map: Dict[str, str]) -> LabeledDataset:
    """Relabel through a total old-name -> new-name map.

    The image of the map, in order of first appearance over the old taxonomy,
    defines the new taxonomy. Counts and ids are conserved.
    """
    new_names: List[str] = []
    for name in dataset.taxonomy.classes:
        if name not in merge_map:
            raise UnknownLabel(f"merge map does not cover class {name!r}")
        target = merge_map[name]
        if target not in new_names:
            new_names.append(target)
    new_taxonomy = SpeechActTaxonomy(tuple(new_names))
    items = [dataclasses.replace(item, label=merge_map[item.label]) for item in dataset.items]
    return LabeledDataset(new_taxonomy, items)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _test_targets(
    class_sizes: List[int], test_ratio: float, exact_total: bool
) -> List[int]:
    if not exact_total:
        return [_round_half_up(test_ratio * n) for n in class_sizes]
    # Largest-remainder: hit round(ratio * total) exactly while keeping
    # per-class counts within 1 of proportional.
    total = sum(class_sizes)
    desired = _round_half_up(test_ratio * total)
    floors = [math.floor(test_ratio * n) for n in class_sizes]
    remainder = desired - sum(floors)
    fractions = sorted(
        range(len(class_sizes)),
        key=lambda c: (-(test_ratio * class_sizes[c] - floors[c]), c),
    )
    targets = list(floors)
    for c in fractions[:remainder]:
        targets[c] += 1
    return targets


def stratified_split(
    dataset: LabeledDataset,
    test_ratio: float = 0.2,
    seed: int = 42,
    exact_total: bool = False,
) -> SplitResult:
    """Seeded per-class shuffle-and-cut split.

    Each class is shuffled with one splitmix64 stream (classes consumed in
    taxonomy order), and the first round(test_ratio * n_c) items go to the
    test set. The same seed always reproduces the same membership; a class
    with a single item lands in train. Classes with zero items raise an
    EmptyClassWarning and are skipped.
    """
    if not 0.0 < test_ratio < 1.0:
        raise ValueError("test_ratio must be in (0, 1)")
    taxonomy = dataset.taxonomy
    positions: List[List[int]] = [[] for _ in taxonomy.classes]
    for pos, item in enumerate(dataset.items):
        positions[taxonomy.index(item.label)].append(pos)

    for c, members in enumerate(positions):
        if not members:
            warnings.warn(
                f"class {taxonomy.name(c)!r} has zero items and is skipped",
                EmptyClassWarning,
                stacklevel=2,
            )

    targets = _test_targets([len(m) for m in positions], test_ratio, exact_total)
    rng = SplitMix64(seed)
    test_positions: set = set()
    for c, members in enumerate(positions):
        if not members:
            continue
        shuffled = rng.shuffled(members)
        test_positions.update(shuffled[: targets[c]])

    train_items = [it for pos, it in enumerate(dataset.items) if pos not in test_positions]
    test_items = [it for pos, it in enumerate(dataset.items) if pos in test_positions]
    return SplitResult(
        train=LabeledDataset(taxonomy, train_items),
        test=LabeledDataset(taxonomy, test_items),
        seed=seed,
        test_ratio=test_ratio,
    )
