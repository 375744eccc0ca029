"""Fusion invariants: permutation, scaling, identity, degenerate weights."""

from __future__ import annotations

import numpy as np
import pytest

from tweetact.dataset import SpeechActTaxonomy
from tweetact.ensemble import (
    EnsembleConfig,
    Prediction,
    ProbabilityMatrix,
    argmax_labels,
    fuse,
    validate_matrix,
)
from tweetact.errors import (
    ClassOrderMismatch,
    DuplicateId,
    EmptyRow,
    IdMismatch,
    RowNotNormalized,
    WeightCountMismatch,
)

N_FIXTURES = 100
N_ROWS = 4
N_CLASSES = 6


def random_matrix(rng: np.random.Generator, model_id: str) -> ProbabilityMatrix:
    raw = rng.random((N_ROWS, N_CLASSES))
    rows = raw / raw.sum(axis=1, keepdims=True)
    return ProbabilityMatrix(
        model_id=model_id,
        ids=[f"t{i}" for i in range(N_ROWS)],
        class_names=tuple(f"C{j}" for j in range(N_CLASSES)),
        rows=rows,
    )


def fixture_batches():
    rng = np.random.default_rng(20240816)
    for _ in range(N_FIXTURES):
        yield [random_matrix(rng, f"m{k}") for k in range(3)], list(
            1.0 + rng.random(3)
        )


def test_permutation_invariance_bit_exact():
    for matrices, weights in fixture_batches():
        baseline = fuse(matrices, weights)
        for perm in ((2, 0, 1), (1, 2, 0), (2, 1, 0), (0, 2, 1), (1, 0, 2)):
            permuted = fuse(
                [matrices[i] for i in perm], [weights[i] for i in perm]
            )
            assert np.array_equal(baseline, permuted)  # bit-exact, not approx


def test_weight_scaling_preserves_argmax():
    taxonomy = SpeechActTaxonomy(tuple(f"C{j}" for j in range(N_CLASSES)))
    for matrices, weights in fixture_batches():
        base_labels = [p.label for p in argmax_labels(fuse(matrices, weights), taxonomy)]
        for factor in (2.5, 0.125, 1000.0):
            scaled = fuse(matrices, [w * factor for w in weights])
            scaled_labels = [p.label for p in argmax_labels(scaled, taxonomy)]
            assert scaled_labels == base_labels


def test_single_model_identity_bit_exact():
    rng = np.random.default_rng(7)
    for _ in range(N_FIXTURES):
        m = random_matrix(rng, "solo")
        assert np.array_equal(fuse([m], [1.0]), m.rows)
        assert np.array_equal(fuse([m]), m.rows)  # default weights are 1.0


def test_degenerate_weights_follow_dominant_model():
    """Near-zero co-weights must not flip the dominant model's argmax."""
    taxonomy = SpeechActTaxonomy(tuple(f"C{j}" for j in range(N_CLASSES)))
    rng = np.random.default_rng(11)
    for _ in range(20):
        dominant = random_matrix(rng, "big")
        # force a wide margin so 1e-9-weighted noise cannot matter
        rows = dominant.rows * 0.2
        winners = rng.integers(0, N_CLASSES, size=N_ROWS)
        for i, w in enumerate(winners):
            rows[i, w] += 1.0 - rows[i].sum()
        dominant.rows = rows
        others = [random_matrix(rng, f"tiny{k}") for k in range(2)]
        fused = fuse([dominant, *others], [1.0, 1e-9, 1e-9])
        labels = [p.label for p in argmax_labels(fused, taxonomy)]
        assert labels == list(winners)


def test_fuse_input_validation():
    rng = np.random.default_rng(3)
    matrices = [random_matrix(rng, f"m{k}") for k in range(2)]
    with pytest.raises(ValueError):
        fuse([])
    with pytest.raises(WeightCountMismatch):
        fuse(matrices, [1.0])
    with pytest.raises(ValueError):
        fuse(matrices, [1.0, 0.0])
    reordered = ProbabilityMatrix(
        model_id="m1",
        ids=list(reversed(matrices[0].ids)),
        class_names=matrices[0].class_names,
        rows=matrices[0].rows,
    )
    with pytest.raises(IdMismatch):
        fuse([matrices[0], reordered])
    renamed = ProbabilityMatrix(
        model_id="m1",
        ids=matrices[0].ids,
        class_names=tuple(reversed(matrices[0].class_names)),
        rows=matrices[0].rows,
    )
    with pytest.raises(ClassOrderMismatch):
        fuse([matrices[0], renamed])


def test_argmax_tie_breaks_to_lowest_index():
    taxonomy = SpeechActTaxonomy(("A", "B", "C"))
    rows = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [1 / 3, 1 / 3, 1 / 3]])
    labels = [p.label for p in argmax_labels(rows, taxonomy)]
    assert labels == [0, 1, 0]


def test_argmax_predictions_carry_ids_and_scores():
    taxonomy = SpeechActTaxonomy(("A", "B"))
    rows = np.array([[0.3, 0.7], [0.9, 0.1]])
    preds = argmax_labels(rows, taxonomy, ids=["x", "y"])
    assert preds[0] == Prediction(id="x", label=1, score=0.7)
    assert preds[1].id == "y" and preds[1].label == 0
    with pytest.raises(IdMismatch):
        argmax_labels(rows, taxonomy, ids=["x"])
    with pytest.raises(EmptyRow):
        argmax_labels(np.zeros((2, 0)), taxonomy)
    with pytest.raises(ClassOrderMismatch):
        argmax_labels(np.zeros((2, 3)), taxonomy)


def test_validate_matrix_checks(taxonomy):
    good = ProbabilityMatrix(
        model_id="m",
        ids=["a", "b"],
        class_names=taxonomy.classes,
        rows=np.full((2, 6), 1 / 6),
    )
    assert validate_matrix(good, taxonomy) is good

    dup = ProbabilityMatrix("m", ["a", "a"], taxonomy.classes, np.full((2, 6), 1 / 6))
    with pytest.raises(DuplicateId):
        validate_matrix(dup)

    unnormalized = ProbabilityMatrix(
        "m", ["a"], taxonomy.classes, np.full((1, 6), 0.5)
    )
    with pytest.raises(RowNotNormalized):
        validate_matrix(unnormalized)

    negative_rows = np.full((1, 6), 1 / 6)
    negative_rows[0, 0] = -0.1
    negative_rows[0, 1] = 1 / 6 + 0.1
    negative = ProbabilityMatrix("m", ["a"], taxonomy.classes, negative_rows)
    with pytest.raises(RowNotNormalized):
        validate_matrix(negative)

    wrong_order = ProbabilityMatrix(
        "m", ["a"], tuple(reversed(taxonomy.classes)), np.full((1, 6), 1 / 6)
    )
    with pytest.raises(ClassOrderMismatch):
        validate_matrix(wrong_order, taxonomy)
    validate_matrix(wrong_order)  # no taxonomy given, order not checked


def test_validate_matrix_tolerance_boundary(taxonomy):
    rows = np.full((1, 6), 1 / 6)
    rows[0, 0] += 5e-5  # inside the 1e-4 row-sum tolerance
    validate_matrix(ProbabilityMatrix("m", ["a"], taxonomy.classes, rows), taxonomy)
    rows = np.full((1, 6), 1 / 6)
    rows[0, 0] += 5e-4  # outside
    with pytest.raises(RowNotNormalized):
        validate_matrix(ProbabilityMatrix("m", ["a"], taxonomy.classes, rows))


def test_ensemble_config_rejects_bad_weights():
    EnsembleConfig(weights=(1.0, 2.0))
    with pytest.raises(ValueError):
        EnsembleConfig(weights=(1.0, 0.0))
    with pytest.raises(ValueError):
        EnsembleConfig(weights=(-1.0,))


def test_matrix_shape_validation(taxonomy):
    with pytest.raises(ValueError):
        ProbabilityMatrix("m", ["a"], taxonomy.classes, np.zeros((2, 6)))
    with pytest.raises(ValueError):
        ProbabilityMatrix("m", ["a"], taxonomy.classes, np.zeros(6))
