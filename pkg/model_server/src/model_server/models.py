"""Served model implementations.

Two families: ``hash:<name>`` is a deterministic fake for offline work and
protocol tests; ``transformers:<checkpoint>`` loads a Hugging Face
checkpoint lazily (weights must already be available locally or via the
configured HF cache). Fine-tuning is out of scope; the shim serves whatever
checkpoint it is pointed at.
"""

from __future__ import annotations

import hashlib
from typing import List, Sequence

# Neutral candidates the hash model offers for fill-mask requests.
FILL_WORDS = (
    "جميل",
    "كبير",
    "جديد",
    "رائع",
    "كثير",
    "قليل",
    "طيب",
    "سريع",
    "قديم",
    "بعيد",
    "قريب",
    "واضح",
)


class UnsupportedTask(Exception):
    """The served model does not handle the requested endpoint."""


def _digest(*parts: str) -> bytes:
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).digest()


class HashModel:
    """Deterministic stand-in model keyed on (name, input)."""

    def __init__(self, name: str):
        self.name = name

    def classify(self, texts: Sequence[str], classes: Sequence[str]) -> List[List[float]]:
        rows = []
        for text in texts:
            digest = _digest("classify", self.name, text)
            # one positive weight per class from successive digest pairs
            weights = [
                1 + int.from_bytes(digest[2 * i : 2 * i + 2], "big")
                for i in range(len(classes))
            ]
            total = sum(weights)
            rows.append([w / total for w in weights])
        return rows

    def fill_mask(self, tokens: Sequence[str], position: int, top_k: int) -> List[str]:
        digest = _digest("fill-mask", self.name, str(position), *tokens)
        start = int.from_bytes(digest[:8], "big") % len(FILL_WORDS)
        rotated = [FILL_WORDS[(start + i) % len(FILL_WORDS)] for i in range(len(FILL_WORDS))]
        return rotated[:top_k]


class TransformersModel:
    """Hugging Face checkpoint behind the same two methods.

    Imports transformers/torch only on construction, so the shim and its
    tests stay independent of those packages when serving hash models.
    """

    def __init__(self, checkpoint: str, task: str, n_classes: int):
        self.name = checkpoint
        self._task = task
        if task == "classify":
            from transformers import (
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )

            self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self._model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
            self._model.eval()
            if self._model.config.num_labels != n_classes:
                raise ValueError(
                    f"checkpoint has {self._model.config.num_labels} labels, "
                    f"server configured for {n_classes} classes"
                )
        else:
            from transformers import pipeline

            self._pipeline = pipeline("fill-mask", model=checkpoint)

    def classify(self, texts: Sequence[str], classes: Sequence[str]) -> List[List[float]]:
        if self._task != "classify":
            raise UnsupportedTask("checkpoint loaded for fill-mask")
        import torch

        encoded = self._tokenizer(
            list(texts), return_tensors="pt", padding=True, truncation=True
        )
        with torch.inference_mode():
            logits = self._model(**encoded).logits
        return torch.softmax(logits, dim=-1).tolist()

    def fill_mask(self, tokens: Sequence[str], position: int, top_k: int) -> List[str]:
        if self._task == "classify":
            raise UnsupportedTask("checkpoint loaded for classification")
        mask = self._pipeline.tokenizer.mask_token
        words = list(tokens[:position]) + [mask] + list(tokens[position:])
        results = self._pipeline(" ".join(words), top_k=top_k)
        return [entry["token_str"].strip() for entry in results][:top_k]


def load_model(spec: str, task: str, n_classes: int):
    """Resolve a --model spec into a served model instance."""
    if spec.startswith("hash:"):
        name = spec[len("hash:") :]
        if not name:
            raise ValueError("hash model needs a name, e.g. hash:demo")
        return HashModel(name)
    if spec.startswith("transformers:"):
        checkpoint = spec[len("transformers:") :]
        if not checkpoint:
            raise ValueError("transformers model needs a checkpoint path or id")
        return TransformersModel(checkpoint, task, n_classes)
    raise ValueError(f"unknown model spec {spec!r}; use hash:<name> or transformers:<checkpoint>")
