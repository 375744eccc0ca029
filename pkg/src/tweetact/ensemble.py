"""Probability-fusion ensembling: weighted row sums, then argmax."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dataset import SpeechActTaxonomy
from .errors import (
    ClassOrderMismatch,
    DuplicateId,
    EmptyRow,
    IdMismatch,
    RowNotNormalized,
    WeightCountMismatch,
)

ROW_SUM_TOLERANCE = 1e-4


@dataclass
class ProbabilityMatrix:
    """Per-model class probabilities: one row per tweet, columns follow the
    taxonomy order."""

    model_id: str
    ids: List[str]
    class_names: Tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        self.ids = list(self.ids)
        self.class_names = tuple(self.class_names)
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if self.rows.shape != (len(self.ids), len(self.class_names)):
            raise ValueError(
                f"rows shape {self.rows.shape} does not match "
                f"{len(self.ids)} ids x {len(self.class_names)} classes"
            )


@dataclass(frozen=True)
class EnsembleConfig:
    weights: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w <= 0 for w in self.weights):
            raise ValueError("ensemble weights must be strictly positive")


@dataclass(frozen=True)
class Prediction:
    id: str
    label: int
    score: float


def validate_matrix(
    matrix: ProbabilityMatrix,
    taxonomy: Optional[SpeechActTaxonomy] = None,
    tolerance: float = ROW_SUM_TOLERANCE,
) -> ProbabilityMatrix:
    """Check row sums, value ranges, id uniqueness and class order."""
    seen = set()
    for tweet_id in matrix.ids:
        if tweet_id in seen:
            raise DuplicateId(f"matrix {matrix.model_id!r} repeats id {tweet_id!r}")
        seen.add(tweet_id)
    if matrix.rows.size:
        if (matrix.rows < 0).any() or (matrix.rows > 1).any():
            bad = int(np.argwhere((matrix.rows < 0) | (matrix.rows > 1))[0][0])
            raise RowNotNormalized(
                f"matrix {matrix.model_id!r} row for id {matrix.ids[bad]!r} "
                "has entries outside [0, 1]"
            )
        sums = matrix.rows.sum(axis=1)
        off = np.abs(sums - 1.0) > tolerance
        if off.any():
            bad = int(np.argmax(off))
            raise RowNotNormalized(
                f"matrix {matrix.model_id!r} row for id {matrix.ids[bad]!r} "
                f"sums to {sums[bad]:.6f}"
            )
    if taxonomy is not None and matrix.class_names != taxonomy.classes:
        raise ClassOrderMismatch(
            f"matrix {matrix.model_id!r} classes {list(matrix.class_names)} "
            f"vs taxonomy {list(taxonomy.classes)}"
        )
    return matrix


def fuse(
    matrices: Sequence[ProbabilityMatrix],
    weights: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Weighted sum of aligned probability matrices.

    Per-cell contributions are accumulated in value-sorted order, so the
    result is bit-identical under any permutation of the (matrix, weight)
    pairs. Rows are not renormalized; only argmax consumes them.
    """
    if not matrices:
        raise ValueError("need at least one probability matrix")
    first = matrices[0]
    for m in matrices[1:]:
        if m.ids != first.ids:
            raise IdMismatch(f"matrix {m.model_id!r} ids differ from {first.model_id!r}")
        if m.class_names != first.class_names:
            raise ClassOrderMismatch(
                f"matrix {m.model_id!r} class order differs from {first.model_id!r}"
            )
    if weights is None:
        weights = [1.0] * len(matrices)
    if len(weights) != len(matrices):
        raise WeightCountMismatch(f"{len(weights)} weights for {len(matrices)} matrices")
    if any(w <= 0 for w in weights):
        raise ValueError("ensemble weights must be strictly positive")

    stack = np.stack([w * m.rows for w, m in zip(weights, matrices)], axis=0)
    stack.sort(axis=0)
    return stack.sum(axis=0)


def argmax_labels(
    rows: np.ndarray,
    taxonomy: SpeechActTaxonomy,
    ids: Optional[Sequence[str]] = None,
) -> List[Prediction]:
    """Pick the winning class per row; ties go to the lowest class index."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] == 0:
        raise EmptyRow("rows must be N x C with C >= 1")
    if rows.shape[1] != len(taxonomy):
        raise ClassOrderMismatch(
            f"{rows.shape[1]} columns vs taxonomy of size {len(taxonomy)}"
        )
    if ids is None:
        ids = [str(i) for i in range(rows.shape[0])]
    if len(ids) != rows.shape[0]:
        raise IdMismatch(f"{len(ids)} ids for {rows.shape[0]} rows")
    winners = rows.argmax(axis=1)  # argmax returns the first maximum
    return [
        Prediction(id=tweet_id, label=int(c), score=float(rows[i, c]))
        for i, (tweet_id, c) in enumerate(zip(ids, winners))
    ]
