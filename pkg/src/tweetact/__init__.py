"""Arabic tweet speech-act pipeline toolkit.

Normalization, annotation adjudication, stratified splitting, class-balancing
augmentation, probability-fusion ensembling, evaluation metrics, and local
word-level explanations, with deterministic seeded randomness throughout.
"""

from .augment import (
    INSERTION_WORDS,
    AugmentationPlan,
    SyntheticTweet,
    apply_plan,
    balance_dataset,
    balance_plan,
    stub_insert,
)
from .backends import (
    BackendDescriptor,
    backend_inserter,
    classify_batch,
    fill_mask,
    health,
)
from .dataset import (
    DEFAULT_CLASSES,
    AdjudicationReport,
    ClassDistribution,
    LabeledDataset,
    SpeechActTaxonomy,
    SplitResult,
    adjudicate,
    adjudicate_dataset,
    class_distribution,
    merge_classes,
    stratified_split,
)
from .ensemble import (
    EnsembleConfig,
    Prediction,
    ProbabilityMatrix,
    argmax_labels,
    fuse,
    validate_matrix,
)
from .errors import TweetActError
from .explain import (
    Explanation,
    PerturbationSample,
    exhaustive_masks,
    explain,
    fit_surrogate,
    perturb,
    proximity_weight,
)
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    MetricsReport,
    aggregate,
    build_report,
    confusion,
    per_class_metrics,
    round2,
)
from .normalize import (
    DEFAULT_LETTER_MAP,
    DEFAULT_TAG_LEXICON,
    NormalizationConfig,
    NormalizedTweet,
    RawTweet,
    normalize_dataset,
    normalize_text,
)
from .pipeline import PipelineConfig, RunManifest, load_config, run_pipeline
from .rng import SplitMix64, derive_seed, mix64
from .version import VERSION

__version__ = VERSION

__all__ = [
    "INSERTION_WORDS",
    "AugmentationPlan",
    "SyntheticTweet",
    "apply_plan",
    "balance_dataset",
    "balance_plan",
    "stub_insert",
    "BackendDescriptor",
    "backend_inserter",
    "classify_batch",
    "fill_mask",
    "health",
    "DEFAULT_CLASSES",
    "AdjudicationReport",
    "ClassDistribution",
    "LabeledDataset",
    "SpeechActTaxonomy",
    "SplitResult",
    "adjudicate",
    "adjudicate_dataset",
    "class_distribution",
    "merge_classes",
    "stratified_split",
    "EnsembleConfig",
    "Prediction",
    "ProbabilityMatrix",
    "argmax_labels",
    "fuse",
    "validate_matrix",
    "TweetActError",
    "Explanation",
    "PerturbationSample",
    "exhaustive_masks",
    "explain",
    "fit_surrogate",
    "perturb",
    "proximity_weight",
    "ClassMetrics",
    "ConfusionMatrix",
    "MetricsReport",
    "aggregate",
    "build_report",
    "confusion",
    "per_class_metrics",
    "round2",
    "DEFAULT_LETTER_MAP",
    "DEFAULT_TAG_LEXICON",
    "NormalizationConfig",
    "NormalizedTweet",
    "RawTweet",
    "normalize_dataset",
    "normalize_text",
    "PipelineConfig",
    "RunManifest",
    "load_config",
    "run_pipeline",
    "SplitMix64",
    "derive_seed",
    "mix64",
    "VERSION",
]
