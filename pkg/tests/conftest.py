"""Shared fixtures: reference oracle values and synthetic corpus builders."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import pytest

from tweetact.dataset import LabeledDataset, SpeechActTaxonomy

SHORT_CLASSES = ("Exp", "Que", "Req", "Ass", "Rec", "Oth")

# Reference confusion matrix of a published benchmark run of a six-class
# tweet-act classifier (rows = gold, columns = predicted). Serves as the
# numeric oracle for the metrics module; the expected values below were
# derived from it by hand with exact rational arithmetic.
REFERENCE_CONFUSION = np.array(
    [
        [1873, 79, 95, 65, 64, 5],
        [61, 985, 26, 8, 1, 0],
        [48, 21, 407, 4, 11, 4],
        [75, 4, 6, 380, 5, 0],
        [57, 3, 9, 7, 93, 0],
        [28, 1, 7, 9, 0, 27],
    ],
    dtype=np.int64,
)

# (precision, recall, f1) per class after 2-decimal half-up rounding.
EXPECTED_ROUNDED = {
    "Exp": (0.87, 0.86, 0.87),
    "Que": (0.90, 0.91, 0.91),
    "Req": (0.74, 0.82, 0.78),
    "Ass": (0.80, 0.81, 0.81),
    "Rec": (0.53, 0.55, 0.54),
    "Oth": (0.75, 0.38, 0.50),
}
EXPECTED_ACCURACY_FRACTION = (3765, 4468)
EXPECTED_ROUNDED_AGGREGATES = {"accuracy": 0.84, "macro_f1": 0.73, "weighted_f1": 0.84}

# Normalization fixpoints: plain Arabic words with no letter variants and no
# character runs, so generated corpora keep their exact token sequences.
WORD_POOL = (
    "كلام جميل يوم سعيد كتاب قلم قهوه شاي صباح مساء خير نور بيت باب شارع "
    "مدينه بحر سماء نجم قمر شمس ورد شجر ماء هواء طعام خبز لحم سمك فول"
).split()


@pytest.fixture
def taxonomy() -> SpeechActTaxonomy:
    return SpeechActTaxonomy(SHORT_CLASSES)


@dataclass
class Row:
    id: str
    label: Optional[str]


def make_labeled_rows(taxonomy: SpeechActTaxonomy, counts: Dict[str, int]) -> LabeledDataset:
    """Dataset of bare (id, label) rows with the requested class counts."""
    rows: List[Row] = []
    for name in taxonomy.classes:
        for i in range(counts.get(name, 0)):
            rows.append(Row(id=f"{name}-{i}", label=name))
    return LabeledDataset(taxonomy, rows)


def make_text(rng: random.Random, n_words: int) -> str:
    return " ".join(rng.choice(WORD_POOL) for _ in range(n_words))


def make_vote_corpus(
    class_counts: Dict[str, int],
    n_excluded: int = 0,
    n_short: int = 0,
    seed: int = 1234,
) -> Tuple[List[dict], Dict[str, int]]:
    """Raw vote rows with known adjudication and normalization outcomes.

    Returns (rows, expectations): `class_counts` rows adjudicate to their
    class and survive normalization; `n_excluded` rows are three-way
    disagreements; `n_short` rows adjudicate fine but normalize to fewer
    than three words. Row order is shuffled deterministically.
    """
    classes = list(class_counts)
    if n_excluded and len(classes) < 3:
        raise ValueError("three-way disagreement needs at least 3 classes")
    rng = random.Random(seed)
    rows: List[dict] = []
    serial = 0

    def next_id() -> str:
        nonlocal serial
        serial += 1
        return f"t{serial:05d}"

    for name, count in class_counts.items():
        for _ in range(count):
            other = rng.choice(classes)
            votes = [name, name, other]
            rng.shuffle(votes)
            rows.append(
                {"id": next_id(), "text": make_text(rng, rng.randint(3, 8)), "votes": votes}
            )
    for _ in range(n_excluded):
        votes = rng.sample(classes, 3)
        rows.append(
            {"id": next_id(), "text": make_text(rng, rng.randint(3, 8)), "votes": votes}
        )
    for _ in range(n_short):
        name = rng.choice(classes)
        rows.append(
            {"id": next_id(), "text": make_text(rng, 2), "votes": [name, name, name]}
        )
    rng.shuffle(rows)
    expectations = {
        "total": len(rows),
        "excluded": n_excluded,
        "retained": len(rows) - n_excluded,
        "normalized": len(rows) - n_excluded - n_short,
    }
    return rows, expectations
