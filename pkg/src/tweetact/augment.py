"""Class-balancing augmentation.

Every class except the largest is grown up to the largest class's size by
sampling source tweets (seeded shuffle, round-robin with replacement) and
handing each one to a word-inserter. Originals are never modified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .dataset import ClassDistribution, LabeledDataset, class_distribution
from .errors import EmptyClassError, InserterFailure
from .normalize import NormalizedTweet
from .rng import SplitMix64, derive_seed

# A word inserter takes (tokens, seed) and returns a new token list.
Inserter = Callable[[List[str], int], List[str]]

# Fixed marker vocabulary for the offline stub inserter: common Arabic
# intensifiers that are fixpoints of the default normalization.
INSERTION_WORDS: Tuple[str, ...] = (
    "جدا",
    "فعلا",
    "حقا",
    "ايضا",
    "طبعا",
    "اكيد",
    "تماما",
)


@dataclass(frozen=True)
class AugmentationPlan:
    """How many synthetic items to create per class."""

    class_names: Tuple[str, ...]
    deficits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.class_names) != len(self.deficits):
            raise ValueError("plan class names and deficits differ in length")
        if any(d < 0 for d in self.deficits):
            raise ValueError("deficits must be non-negative")

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.class_names, self.deficits))

    @classmethod
    def from_dict(cls, data: Dict[str, int]) -> "AugmentationPlan":
        return cls(tuple(data.keys()), tuple(int(v) for v in data.values()))


@dataclass
class SyntheticTweet(NormalizedTweet):
    """A generated tweet; carries the id of the tweet it grew from."""

    source_id: str = ""


def balance_plan(distribution: ClassDistribution) -> AugmentationPlan:
    """Deficit per class that lifts every class to the largest class's size."""
    if distribution.total <= 0:
        raise ValueError("distribution is empty")
    top = max(distribution.counts)
    deficits = tuple(top - c for c in distribution.counts)
    return AugmentationPlan(distribution.class_names, deficits)


def stub_insert(tokens: Sequence[str], seed: int) -> List[str]:
    """Deterministic stand-in for a contextual inserter.

    Inserts exactly one marker word from INSERTION_WORDS at a seeded
    position; removing that word recovers the input.
    """
    if not tokens:
        raise ValueError("tokens must be non-empty")
    rng = SplitMix64(seed)
    word = INSERTION_WORDS[rng.below(len(INSERTION_WORDS))]
    position = rng.below(len(tokens) + 1)
    out = list(tokens)
    out.insert(position, word)
    return out


def apply_plan(
    dataset: LabeledDataset,
    plan: AugmentationPlan,
    inserter: Optional[Inserter] = None,
    seed: int = 0,
) -> LabeledDataset:
    """Generate the planned synthetic tweets and append them to the dataset.

    Sources per class are drawn round-robin over a seeded shuffle, with
    replacement, so deficits larger than the class are legal. Each synthetic
    item gets its own derived seed, which makes the output independent of
    call scheduling. A synthetic that collides with an existing tweet's
    tokens is retried once with a fresh seed, then accepted. For plans
    produced by balance_plan the resulting distribution is exactly uniform.
    """
    inserter = inserter or stub_insert
    taxonomy = dataset.taxonomy
    if plan.class_names != taxonomy.classes:
        raise ValueError(
            f"plan classes {list(plan.class_names)} do not match "
            f"taxonomy {list(taxonomy.classes)}"
        )
    seen_tokens = {tuple(item.tokens) for item in dataset.items}
    synthetic_counts: Dict[str, int] = {}
    items: List = list(dataset.items)

    for c, name in enumerate(taxonomy.classes):
        deficit = plan.deficits[c]
        if deficit == 0:
            continue
        sources = [item for item in dataset.items if item.label == name]
        if not sources:
            raise EmptyClassError(
                f"class {name!r} needs {deficit} synthetic items but has no sources"
            )
        order = SplitMix64(derive_seed(seed, c)).shuffled(range(len(sources)))
        for n in range(deficit):
            source = sources[order[n % len(sources)]]
            tokens = _insert(inserter, source, derive_seed(seed, c, n))
            if tuple(tokens) in seen_tokens:
                tokens = _insert(inserter, source, derive_seed(seed, c, n, 1))
            seen_tokens.add(tuple(tokens))
            nth = synthetic_counts.get(source.id, 0) + 1
            synthetic_counts[source.id] = nth
            items.append(
                SyntheticTweet(
                    id=f"{source.id}#aug{nth}",
                    tokens=tokens,
                    label=source.label,
                    source_id=source.id,
                )
            )
    return LabeledDataset(taxonomy, items)


def _insert(inserter: Inserter, source, item_seed: int) -> List[str]:
    try:
        return list(inserter(list(source.tokens), item_seed))
    except Exception as exc:
        raise InserterFailure(source.id, exc) from exc


def balance_dataset(
    dataset: LabeledDataset, inserter: Optional[Inserter] = None, seed: int = 0
) -> LabeledDataset:
    """Convenience: plan against the dataset's own distribution and apply."""
    return apply_plan(dataset, balance_plan(class_distribution(dataset)), inserter, seed)
