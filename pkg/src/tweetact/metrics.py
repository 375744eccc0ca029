"""Confusion matrices and the evaluation metric suite.

Conventions: rows are gold classes, columns are predicted classes; a 0/0
division (empty class) yields 0 for precision, recall and F1; reported values
keep full float precision, with a 2-decimal half-up rounded view for tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import SpeechActTaxonomy
from .errors import EmptyMatrix, IdMismatch, LengthMismatch

Label = Union[int, str]


@dataclass
class ConfusionMatrix:
    taxonomy: SpeechActTaxonomy
    counts: np.ndarray  # C x C, int64, [gold, predicted]

    def __post_init__(self) -> None:
        c = len(self.taxonomy)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (c, c):
            raise ValueError(f"expected {c}x{c} counts, got {self.counts.shape}")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def true_positives(self, c: int) -> int:
        return int(self.counts[c, c])

    def false_positives(self, c: int) -> int:
        return int(self.counts[:, c].sum() - self.counts[c, c])

    def false_negatives(self, c: int) -> int:
        return int(self.counts[c, :].sum() - self.counts[c, c])

    def support(self, c: int) -> int:
        return int(self.counts[c, :].sum())


@dataclass(frozen=True)
class ClassMetrics:
    name: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: Tuple[ClassMetrics, ...]
    accuracy: float
    macro_f1: float
    weighted_f1: float

    def to_dict(self) -> dict:
        return {
            "classes": [m.name for m in self.per_class],
            "per_class": {
                m.name: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for m in self.per_class
            },
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "rounded": {
                "per_class": {
                    m.name: {
                        "precision": round2(m.precision),
                        "recall": round2(m.recall),
                        "f1": round2(m.f1),
                    }
                    for m in self.per_class
                },
                "accuracy": round2(self.accuracy),
                "macro_f1": round2(self.macro_f1),
                "weighted_f1": round2(self.weighted_f1),
            },
        }


def round2(x: float) -> float:
    """2-decimal half-up rounding, matching printed-table convention."""
    return float(Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _to_index(label: Label, taxonomy: SpeechActTaxonomy) -> int:
    if isinstance(label, str):
        return taxonomy.index(label)
    if not 0 <= label < len(taxonomy):
        raise ValueError(f"label index {label} outside taxonomy of size {len(taxonomy)}")
    return int(label)


def confusion(
    gold: Sequence[Label],
    predicted: Sequence[Label],
    taxonomy: SpeechActTaxonomy,
    gold_ids: Optional[Sequence[str]] = None,
    pred_ids: Optional[Sequence[str]] = None,
) -> ConfusionMatrix:
    """Tally gold/predicted pairs into a confusion matrix.

    Labels may be class names or indices. When both id sequences are given
    they must agree pairwise, otherwise IdMismatch fires.
    """
    if len(gold) != len(predicted):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(predicted)} predictions")
    if len(gold) == 0:
        raise LengthMismatch("need at least one gold/predicted pair")
    if gold_ids is not None and pred_ids is not None:
        if len(gold_ids) != len(pred_ids):
            raise IdMismatch(f"{len(gold_ids)} gold ids vs {len(pred_ids)} prediction ids")
        for g, p in zip(gold_ids, pred_ids):
            if g != p:
                raise IdMismatch(f"id-aligned inputs disagree: gold {g!r} vs predicted {p!r}")
    c = len(taxonomy)
    counts = np.zeros((c, c), dtype=np.int64)
    for g, p in zip(gold, predicted):
        counts[_to_index(g, taxonomy), _to_index(p, taxonomy)] += 1
    return ConfusionMatrix(taxonomy, counts)


def per_class_metrics(cm: ConfusionMatrix) -> List[ClassMetrics]:
    """Precision, recall, F1 and support for every taxonomy class."""
    out: List[ClassMetrics] = []
    for c, name in enumerate(cm.taxonomy.classes):
        tp = cm.true_positives(c)
        fp = cm.false_positives(c)
        fn = cm.false_negatives(c)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out.append(ClassMetrics(name, precision, recall, f1, cm.support(c)))
    return out


def aggregate(cm: ConfusionMatrix) -> Dict[str, float]:
    """Accuracy, macro-averaged F1 and support-weighted F1."""
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix holds no observations")
    per_class = per_class_metrics(cm)
    accuracy = int(np.trace(cm.counts)) / total
    macro_f1 = sum(m.f1 for m in per_class) / len(per_class)
    weighted_f1 = sum(m.f1 * m.support for m in per_class) / total
    return {"accuracy": accuracy, "macro_f1": macro_f1, "weighted_f1": weighted_f1}


def build_report(cm: ConfusionMatrix) -> MetricsReport:
    agg = aggregate(cm)
    return MetricsReport(
        per_class=tuple(per_class_metrics(cm)),
        accuracy=agg["accuracy"],
        macro_f1=agg["macro_f1"],
        weighted_f1=agg["weighted_f1"],
    )
