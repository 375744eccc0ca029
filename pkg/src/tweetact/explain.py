"""Local word-level explanations for single-tweet predictions.

The explainer perturbs a tweet by dropping subsets of its unique words,
asks the classifier for probabilities on every perturbed text, then fits a
proximity-weighted ridge regression from word-presence masks to the target
class probability. Coefficients rank how much each word pushed the
prediction. Everything is seeded, so an explanation is reproducible from
(text, classifier, seed) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .backends import BackendDescriptor, classify_batch
from .dataset import SpeechActTaxonomy
from .errors import BackendFailure, SingularSystem, TooShort, TweetActError
from .normalize import NormalizationConfig, normalize_text
from .rng import SplitMix64

DEFAULT_KERNEL_WIDTH = 25.0
DEFAULT_RIDGE = 1e-3
DEFAULT_TOP_K = 7
DEFAULT_SAMPLES = 1000
EXHAUSTIVE_MAX_WORDS = 12

Classifier = Union[BackendDescriptor, Callable[[List[str]], Sequence[Sequence[float]]]]


@dataclass(frozen=True)
class PerturbationSample:
    """One perturbed variant of the tweet.

    ``mask`` has one bit per unique word (1 = kept); ``text`` is the tweet
    with dropped words removed at every occurrence; ``proximity`` is the
    kernel weight of this sample relative to the original.
    """

    mask: Tuple[int, ...]
    text: str
    proximity: float


@dataclass(frozen=True)
class Explanation:
    target_class: int
    class_probabilities: Tuple[float, ...]
    words: Tuple[str, ...]
    coefficients: Tuple[float, ...]
    intercept: float
    top_k: Tuple[Tuple[str, float], ...]

    def as_dict(self) -> dict:
        return {
            "target_class": self.target_class,
            "class_probabilities": list(self.class_probabilities),
            "words": list(self.words),
            "coefficients": list(self.coefficients),
            "intercept": self.intercept,
            "top_k": [[word, weight] for word, weight in self.top_k],
        }


def unique_words(tokens: Sequence[str]) -> List[str]:
    """Unique tokens in first-occurrence order."""
    return list(dict.fromkeys(tokens))


def proximity_weight(mask: Sequence[int], kernel_width: float = DEFAULT_KERNEL_WIDTH) -> float:
    """Exponential kernel exp(-d^2 / width^2) on cosine distance.

    For binary masks against the all-ones original, cosine distance reduces
    to d = 1 - sqrt(k/n) with k kept words out of n. The empty mask has no
    direction, so its distance is pinned to 1.
    """
    n = len(mask)
    if n == 0:
        raise ValueError("mask must be non-empty")
    k = sum(mask)
    distance = 1.0 if k == 0 else 1.0 - math.sqrt(k / n)
    return math.exp(-(distance * distance) / (kernel_width * kernel_width))


def _reconstruct(mask: Sequence[int], words: Sequence[str], tokens: Sequence[str]) -> str:
    kept = {word for word, bit in zip(words, mask) if bit}
    return " ".join(token for token in tokens if token in kept)


def _sample(
    mask: Sequence[int],
    words: Sequence[str],
    tokens: Sequence[str],
    kernel_width: float,
) -> PerturbationSample:
    return PerturbationSample(
        mask=tuple(int(b) for b in mask),
        text=_reconstruct(mask, words, tokens),
        proximity=proximity_weight(mask, kernel_width),
    )


def perturb(
    words: Sequence[str],
    n_samples: int,
    seed: int,
    tokens: Optional[Sequence[str]] = None,
    kernel_width: float = DEFAULT_KERNEL_WIDTH,
) -> List[PerturbationSample]:
    """Draw perturbation masks over the unique words.

    The first sample is always the unperturbed all-ones mask. Each further
    sample drops a uniform count in 1..n of uniformly chosen words.
    ``tokens`` is the full token sequence used for text reconstruction and
    defaults to the words themselves.
    """
    if len(set(words)) != len(words):
        raise ValueError("words must be unique")
    if not words:
        raise TooShort("no words to perturb")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    tokens = list(tokens) if tokens is not None else list(words)
    n = len(words)
    rng = SplitMix64(seed)
    samples = [_sample([1] * n, words, tokens, kernel_width)]
    for _ in range(n_samples - 1):
        n_drop = rng.below(n) + 1
        mask = [1] * n
        for index in rng.sample_indices(n, n_drop):
            mask[index] = 0
        samples.append(_sample(mask, words, tokens, kernel_width))
    return samples


def exhaustive_masks(
    words: Sequence[str],
    tokens: Optional[Sequence[str]] = None,
    kernel_width: float = DEFAULT_KERNEL_WIDTH,
) -> List[PerturbationSample]:
    """All 2^n masks, all-ones first, then descending as bit patterns."""
    if len(set(words)) != len(words):
        raise ValueError("words must be unique")
    if not words:
        raise TooShort("no words to perturb")
    tokens = list(tokens) if tokens is not None else list(words)
    n = len(words)
    samples = []
    for value in range((1 << n) - 1, -1, -1):
        mask = [(value >> j) & 1 for j in range(n)]
        samples.append(_sample(mask, words, tokens, kernel_width))
    return samples


def fit_surrogate(
    samples: Sequence[PerturbationSample],
    probabilities: np.ndarray,
    target_class: int,
    ridge: float = DEFAULT_RIDGE,
) -> Tuple[float, np.ndarray]:
    """Weighted ridge fit of mask -> target-class probability.

    Solves (X'WX + lambda*D) beta = X'Wy by normal equations, where X is the
    mask matrix with a leading intercept column, W the proximity weights,
    and D the identity with a zero in the intercept slot (the intercept is
    never penalized). The solve is LAPACK LU with partial pivoting, which is
    bit-deterministic for fixed inputs. With lambda = 0 a rank-deficient
    design raises SingularSystem instead of returning garbage.
    """
    if not samples:
        raise ValueError("samples must be non-empty")
    n_words = len(samples[0].mask)
    if len(samples) < n_words + 1:
        raise ValueError(
            f"need at least {n_words + 1} samples for {n_words} words, "
            f"got {len(samples)}"
        )
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.ndim != 2 or probabilities.shape[0] != len(samples):
        raise ValueError("probabilities must be one row per sample")
    if not 0 <= target_class < probabilities.shape[1]:
        raise ValueError(f"target class {target_class} out of range")

    masks = np.asarray([sample.mask for sample in samples], dtype=np.float64)
    weights = np.asarray([sample.proximity for sample in samples], dtype=np.float64)
    y = probabilities[:, target_class]
    design = np.hstack([np.ones((len(samples), 1)), masks])

    if ridge == 0.0:
        scaled = design * np.sqrt(weights)[:, None]
        if np.linalg.matrix_rank(scaled) < n_words + 1:
            raise SingularSystem(
                "design matrix is rank-deficient; use ridge > 0 or more samples"
            )
    weighted = design * weights[:, None]
    normal = design.T @ weighted
    penalty = np.eye(n_words + 1)
    penalty[0, 0] = 0.0
    beta = np.linalg.solve(normal + ridge * penalty, weighted.T @ y)
    return float(beta[0]), beta[1:]


def _classify(classifier: Classifier, texts: List[str], taxonomy: Optional[SpeechActTaxonomy]) -> np.ndarray:
    if isinstance(classifier, BackendDescriptor):
        if taxonomy is None:
            raise ValueError("a taxonomy is required with a backend descriptor")
        matrix = classify_batch(texts, classifier, taxonomy)
        return matrix.rows
    try:
        rows = np.asarray(classifier(texts), dtype=np.float64)
    except TweetActError:
        raise
    except Exception as exc:
        raise BackendFailure(f"classifier callable failed: {exc}") from exc
    if rows.ndim != 2 or rows.shape[0] != len(texts) or rows.shape[1] < 1:
        raise BackendFailure(
            f"classifier returned shape {rows.shape}, expected ({len(texts)}, C)"
        )
    return rows


def explain(
    text: str,
    classifier: Classifier,
    *,
    target_class: Optional[int] = None,
    k: int = DEFAULT_TOP_K,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    ridge: float = DEFAULT_RIDGE,
    kernel_width: float = DEFAULT_KERNEL_WIDTH,
    config: Optional[NormalizationConfig] = None,
    exhaustive: Optional[bool] = None,
    taxonomy: Optional[SpeechActTaxonomy] = None,
) -> Explanation:
    """Explain one tweet's prediction with word-level weights.

    ``classifier`` is either a BackendDescriptor (needs ``taxonomy``) or a
    callable mapping a list of texts to a probability row per text. With
    ``exhaustive`` unset, tweets of at most 12 unique words get all 2^n
    masks instead of sampling. ``target_class`` defaults to the argmax of
    the original text's probabilities (lowest index on ties). ``top_k``
    pairs are ordered by absolute weight, ties by word position.
    """
    tokens = normalize_text(text, config)
    if not tokens:
        raise TooShort(f"text normalizes to zero words: {text!r}")
    words = unique_words(tokens)
    if exhaustive is None:
        exhaustive = len(words) <= EXHAUSTIVE_MAX_WORDS
    if exhaustive:
        samples = exhaustive_masks(words, tokens, kernel_width)
    else:
        samples = perturb(words, n_samples, seed, tokens, kernel_width)

    rows = _classify(classifier, [sample.text for sample in samples], taxonomy)
    if rows.shape[0] != len(samples):
        raise BackendFailure(
            f"classifier returned {rows.shape[0]} rows for {len(samples)} texts"
        )
    original = rows[0]
    target = int(np.argmax(original)) if target_class is None else target_class
    if not 0 <= target < rows.shape[1]:
        raise ValueError(f"target class {target} out of range 0..{rows.shape[1] - 1}")

    intercept, coefficients = fit_surrogate(samples, rows, target, ridge)
    order = sorted(
        range(len(words)), key=lambda j: (-abs(float(coefficients[j])), j)
    )
    top = tuple((words[j], float(coefficients[j])) for j in order[: max(k, 0)])
    return Explanation(
        target_class=target,
        class_probabilities=tuple(float(p) for p in original),
        words=tuple(words),
        coefficients=tuple(float(c) for c in coefficients),
        intercept=intercept,
        top_k=top,
    )
