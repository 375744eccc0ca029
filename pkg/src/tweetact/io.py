"""File formats: JSONL tweet files, probability CSVs, prediction TSVs.

All files are UTF-8. JSONL rows are one object per line with keys
``id`` and ``text`` plus optional ``label``, ``votes`` and ``source_id``.
Probability matrices are CSV with header ``id,<class1>,...,<classC>``.
Predictions are TSV rows of ``id<TAB>label<TAB>score``.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .augment import SyntheticTweet
from .dataset import LabeledDataset, SpeechActTaxonomy
from .ensemble import Prediction, ProbabilityMatrix
from .normalize import NormalizedTweet, RawTweet

PathLike = Union[str, Path]


def _read_jsonl(path: PathLike) -> Iterable[Tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row, dict):
                raise ValueError(f"{path}:{lineno}: expected an object")
            yield lineno, row


def _require(row: dict, key: str, path: PathLike, lineno: int) -> object:
    if key not in row or row[key] in ("", None):
        raise ValueError(f"{path}:{lineno}: missing {key!r}")
    return row[key]


def read_raw_tweets(path: PathLike) -> List[RawTweet]:
    """Load raw tweets; ``votes`` and ``label`` are optional per row."""
    tweets = []
    for lineno, row in _read_jsonl(path):
        votes = row.get("votes")
        tweets.append(
            RawTweet(
                id=str(_require(row, "id", path, lineno)),
                text=str(_require(row, "text", path, lineno)),
                votes=tuple(str(v) for v in votes) if votes is not None else None,
                label=row.get("label"),
            )
        )
    return tweets


def write_raw_tweets(path: PathLike, tweets: Iterable[RawTweet]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for tweet in tweets:
            row: dict = {"id": tweet.id, "text": tweet.text}
            if tweet.votes is not None:
                row["votes"] = list(tweet.votes)
            if tweet.label is not None:
                row["label"] = tweet.label
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_normalized_tweets(path: PathLike) -> List[NormalizedTweet]:
    """Load normalized tweets; rows with ``source_id`` become SyntheticTweet."""
    tweets: List[NormalizedTweet] = []
    for lineno, row in _read_jsonl(path):
        id_ = str(_require(row, "id", path, lineno))
        text = str(_require(row, "text", path, lineno))
        tokens = text.split()
        votes = row.get("votes")
        common = dict(
            id=id_,
            tokens=tokens,
            label=row.get("label"),
            votes=tuple(str(v) for v in votes) if votes is not None else None,
        )
        if row.get("source_id"):
            tweets.append(SyntheticTweet(source_id=str(row["source_id"]), **common))
        else:
            tweets.append(NormalizedTweet(**common))
    return tweets


def write_normalized_tweets(path: PathLike, tweets: Iterable[NormalizedTweet]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for tweet in tweets:
            row: dict = {"id": tweet.id, "text": " ".join(tweet.tokens)}
            if tweet.label is not None:
                row["label"] = tweet.label
            if tweet.votes is not None:
                row["votes"] = list(tweet.votes)
            source_id = getattr(tweet, "source_id", "")
            if source_id:
                row["source_id"] = source_id
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_labeled_dataset(path: PathLike, taxonomy: SpeechActTaxonomy) -> LabeledDataset:
    """Load normalized tweets into a dataset; every row must carry a label."""
    tweets = read_normalized_tweets(path)
    for tweet in tweets:
        if tweet.label is None:
            raise ValueError(f"{path}: tweet {tweet.id!r} has no label")
    return LabeledDataset(taxonomy, tweets)


def read_probability_matrix(
    path: PathLike, model_id: Optional[str] = None
) -> ProbabilityMatrix:
    """Load a probability CSV. The model id defaults to the file stem."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if len(header) < 2 or header[0] != "id":
            raise ValueError(f"{path}: header must be id,<class1>,...,<classC>")
        class_names = tuple(header[1:])
        ids: List[str] = []
        rows: List[List[float]] = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(record)}"
                )
            ids.append(record[0])
            try:
                rows.append([float(cell) for cell in record[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric cell: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return ProbabilityMatrix(
        model_id=model_id or path.stem,
        ids=tuple(ids),
        class_names=class_names,
        rows=np.asarray(rows, dtype=np.float64),
    )


def write_probability_matrix(path: PathLike, matrix: ProbabilityMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", *matrix.class_names])
        for id_, row in zip(matrix.ids, matrix.rows):
            writer.writerow([id_, *(repr(float(cell)) for cell in row)])


def write_predictions(
    path: PathLike, predictions: Sequence[Prediction], taxonomy: SpeechActTaxonomy
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pred in predictions:
            name = taxonomy.name(pred.label)
            handle.write(f"{pred.id}\t{name}\t{repr(float(pred.score))}\n")


def read_predictions(path: PathLike) -> List[Tuple[str, str, float]]:
    """Load prediction rows as (id, label name, score) tuples."""
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            try:
                score = float(fields[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad score: {exc}") from exc
            out.append((fields[0], fields[1], score))
    return out


def load_json(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return data


def save_json(path: PathLike, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def canonical_json(data: object) -> str:
    """Stable serialization used for config hashing."""
    return json.dumps(data, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
