"""Pluggable classification and fill-mask backends.

Three kinds share one descriptor:

- ``stub``: deterministic offline fake, probabilities derived from SHA-256
  of the model id and text. Useful for tests and dry runs.
- ``file``: precomputed probability CSV, rows looked up by tweet id.
- ``http``: JSON-over-HTTP model server. ``POST /classify`` with
  ``{"texts": [...]}`` returns ``{"classes": [...], "probabilities": [[...]]}``;
  ``POST /fill-mask`` with ``{"tokens": [...], "position": i, "top_k": n}``
  returns ``{"candidates": [...]}``; ``GET /health`` reports
  ``{"model": ..., "classes": [...]}``.

The base URL falls back to ``TWEETACT_BACKEND_URL`` and the request timeout
to ``TWEETACT_BACKEND_TIMEOUT_SECS`` (default 30).
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence
from urllib.parse import urlparse

import numpy as np
import requests

from .augment import INSERTION_WORDS
from .dataset import SpeechActTaxonomy
from .ensemble import ProbabilityMatrix, validate_matrix
from .errors import (
    BackendUnavailable,
    ClassOrderMismatch,
    MalformedResponse,
    MissingRow,
)
from .io import read_probability_matrix
from .rng import SplitMix64

ENV_URL = "TWEETACT_BACKEND_URL"
ENV_TIMEOUT = "TWEETACT_BACKEND_TIMEOUT_SECS"
DEFAULT_TIMEOUT_SECS = 30.0
MAX_RETRIES = 2
# Per-request text cap for HTTP classification; servers bound their accepted
# batch size, and 32 stays under common limits while keeping request counts low.
DEFAULT_BATCH_SIZE = 32

KINDS = ("stub", "file", "http")


@dataclass(frozen=True)
class BackendDescriptor:
    """Where predictions come from.

    ``location`` is a CSV path for ``file``, a base URL for ``http`` (may be
    empty to defer to TWEETACT_BACKEND_URL), and unused for ``stub``.
    """

    kind: str
    location: str = ""
    model_id: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "file" and not self.location:
            raise ValueError("file backend needs a CSV path")
        if self.kind == "http" and self.location:
            parsed = urlparse(self.location)
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValueError(f"bad backend URL {self.location!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "BackendDescriptor":
        return cls(
            kind=str(data.get("kind", "")),
            location=str(data.get("location", "")),
            model_id=str(data.get("model_id", "")),
        )

    def as_dict(self) -> dict:
        return {"kind": self.kind, "location": self.location, "model_id": self.model_id}


def _timeout() -> float:
    raw = os.environ.get(ENV_TIMEOUT, "")
    if not raw:
        return DEFAULT_TIMEOUT_SECS
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{ENV_TIMEOUT} must be a number, got {raw!r}") from None
    if value <= 0:
        raise ValueError(f"{ENV_TIMEOUT} must be positive, got {raw!r}")
    return value


def _base_url(descriptor: BackendDescriptor) -> str:
    url = descriptor.location or os.environ.get(ENV_URL, "")
    if not url:
        raise BackendUnavailable(
            f"no backend URL: descriptor has none and {ENV_URL} is unset"
        )
    return url.rstrip("/")


def _post_json(url: str, payload: dict, retries: int = MAX_RETRIES) -> dict:
    """POST with bounded retries on connection failures and 5xx responses."""
    timeout = _timeout()
    last_error: Optional[str] = None
    for attempt in range(retries + 1):
        if attempt:
            time.sleep(min(0.1 * 2 ** (attempt - 1), 1.0))
        try:
            response = requests.post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last_error = str(exc)
            continue
        if response.status_code >= 500:
            last_error = f"HTTP {response.status_code}"
            continue
        if response.status_code != 200:
            raise BackendUnavailable(f"{url} returned HTTP {response.status_code}")
        try:
            body = response.json()
        except ValueError as exc:
            raise MalformedResponse(f"{url}: response is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise MalformedResponse(f"{url}: expected a JSON object")
        return body
    raise BackendUnavailable(f"{url} failed after {retries + 1} attempts: {last_error}")


def health(descriptor: BackendDescriptor) -> dict:
    """GET /health from an http backend."""
    if descriptor.kind != "http":
        raise ValueError("health checks apply to http backends only")
    url = _base_url(descriptor) + "/health"
    try:
        response = requests.get(url, timeout=_timeout())
    except requests.RequestException as exc:
        raise BackendUnavailable(f"{url}: {exc}") from exc
    if response.status_code != 200:
        raise BackendUnavailable(f"{url} returned HTTP {response.status_code}")
    try:
        body = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"{url}: response is not JSON: {exc}") from exc
    if not isinstance(body, dict) or "classes" not in body:
        raise MalformedResponse(f"{url}: health object must list classes")
    return body


def _stub_rows(model_id: str, texts: Sequence[str], n_classes: int) -> np.ndarray:
    rows = np.empty((len(texts), n_classes), dtype=np.float64)
    for i, text in enumerate(texts):
        seed = f"{model_id}\x1f{text}".encode("utf-8")
        values: List[int] = []
        counter = 0
        while len(values) < n_classes:
            digest = hashlib.sha256(seed + counter.to_bytes(4, "big")).digest()
            values.extend(
                int.from_bytes(digest[j : j + 8], "big") + 1
                for j in range(0, 32, 8)
            )
            counter += 1
        row = np.asarray(values[:n_classes], dtype=np.float64)
        rows[i] = row / row.sum()
    return rows


def classify_batch(
    texts: Sequence[str],
    descriptor: BackendDescriptor,
    taxonomy: SpeechActTaxonomy,
    ids: Optional[Sequence[str]] = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> ProbabilityMatrix:
    """Classify texts and return a validated probability matrix.

    Row order matches input order; class order matches the taxonomy. HTTP
    requests carry at most ``batch_size`` texts each, so servers with a
    bounded max batch stay reachable; responses are stitched in request
    order.
    """
    if not texts:
        raise ValueError("texts must be non-empty")
    if ids is not None and len(ids) != len(texts):
        raise ValueError(f"{len(ids)} ids for {len(texts)} texts")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")

    if descriptor.kind == "stub":
        matrix = ProbabilityMatrix(
            model_id=descriptor.model_id or "stub",
            ids=tuple(ids) if ids is not None else tuple(str(i) for i in range(len(texts))),
            class_names=taxonomy.classes,
            rows=_stub_rows(descriptor.model_id or "stub", texts, len(taxonomy)),
        )
    elif descriptor.kind == "file":
        if ids is None:
            raise ValueError("file backend looks rows up by id; ids are required")
        stored = read_probability_matrix(descriptor.location, descriptor.model_id or None)
        if stored.class_names != taxonomy.classes:
            raise ClassOrderMismatch(
                f"{descriptor.location}: classes {list(stored.class_names)} "
                f"do not match taxonomy {list(taxonomy.classes)}"
            )
        by_id = {row_id: i for i, row_id in enumerate(stored.ids)}
        indices = []
        for id_ in ids:
            if id_ not in by_id:
                raise MissingRow(f"{descriptor.location}: no row for id {id_!r}")
            indices.append(by_id[id_])
        matrix = ProbabilityMatrix(
            model_id=stored.model_id,
            ids=tuple(ids),
            class_names=stored.class_names,
            rows=stored.rows[indices],
        )
    else:
        url = _base_url(descriptor) + "/classify"
        chunks = []
        model_name = ""
        for start in range(0, len(texts), batch_size):
            chunk = list(texts[start : start + batch_size])
            body = _post_json(url, {"texts": chunk})
            if "classes" not in body or "probabilities" not in body:
                raise MalformedResponse(f"{url}: missing classes or probabilities")
            classes = tuple(str(c) for c in body["classes"])
            if classes != taxonomy.classes:
                raise ClassOrderMismatch(
                    f"{url}: server classes {list(classes)} "
                    f"do not match taxonomy {list(taxonomy.classes)}"
                )
            probabilities = body["probabilities"]
            if not isinstance(probabilities, list) or len(probabilities) != len(chunk):
                raise MalformedResponse(
                    f"{url}: expected {len(chunk)} probability rows"
                )
            try:
                rows = np.asarray(probabilities, dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise MalformedResponse(f"{url}: non-numeric probabilities") from exc
            if rows.ndim != 2 or rows.shape[1] != len(classes):
                raise MalformedResponse(
                    f"{url}: probability rows must each have {len(classes)} entries"
                )
            chunks.append(rows)
            model_name = model_name or str(body.get("model", "http"))
        matrix = ProbabilityMatrix(
            model_id=descriptor.model_id or model_name,
            ids=tuple(ids) if ids is not None else tuple(str(i) for i in range(len(texts))),
            class_names=taxonomy.classes,
            rows=chunks[0] if len(chunks) == 1 else np.concatenate(chunks, axis=0),
        )
    validate_matrix(matrix, taxonomy)
    return matrix


def fill_mask(
    tokens: Sequence[str],
    position: int,
    descriptor: BackendDescriptor,
    top_k: int = 5,
) -> List[str]:
    """Candidate words for inserting at ``position`` (0..len(tokens))."""
    if not 0 <= position <= len(tokens):
        raise ValueError(f"position {position} out of range 0..{len(tokens)}")
    if top_k < 1:
        raise ValueError("top_k must be at least 1")

    if descriptor.kind == "stub":
        seed = "\x1f".join([descriptor.model_id, str(position), *tokens])
        start = int.from_bytes(
            hashlib.sha256(seed.encode("utf-8")).digest()[:8], "big"
        ) % len(INSERTION_WORDS)
        rotated = [
            INSERTION_WORDS[(start + i) % len(INSERTION_WORDS)]
            for i in range(len(INSERTION_WORDS))
        ]
        return rotated[:top_k]
    if descriptor.kind == "file":
        raise ValueError("file backends store classifications, not mask fills")

    url = _base_url(descriptor) + "/fill-mask"
    body = _post_json(
        url, {"tokens": list(tokens), "position": position, "top_k": top_k}
    )
    candidates = body.get("candidates")
    if not isinstance(candidates, list) or not candidates:
        raise MalformedResponse(f"{url}: missing or empty candidates")
    return [str(c) for c in candidates[:top_k]]


def backend_inserter(
    descriptor: BackendDescriptor, top_k: int = 5
) -> Callable[[List[str], int], List[str]]:
    """Adapt a fill-mask backend to the augmentation inserter signature.

    The seed picks both the insertion position and which candidate to use,
    so a synthetic item is reproducible from (source tokens, seed) alone.
    """

    def insert(tokens: List[str], seed: int) -> List[str]:
        if not tokens:
            raise ValueError("tokens must be non-empty")
        rng = SplitMix64(seed)
        position = rng.below(len(tokens) + 1)
        candidates = fill_mask(tokens, position, descriptor, top_k)
        word = candidates[rng.below(len(candidates))]
        out = list(tokens)
        out.insert(position, word)
        return out

    return insert
