"""Tweet text normalization.

Rules run in a fixed order on every input:

1. URL spans become the url tag.
2. Mention spans (@handle) become the mention tag.
3. Each hashtag marker '#' becomes the hashtag tag; the body stays as a word
   (set ``drop_hashtag_body`` to drop it together with the marker).
4. Each '?' / '؟' becomes the question tag, each '!' the exclamation tag.
5. Arabic diacritics (U+064B..U+065F, U+0670) and tatweel (U+0640) are
   stripped.
6. The letter map folds letter variants into a canonical form.
7. Everything that is not an Arabic-block letter is scrubbed: combining marks
   and format characters are deleted in place, all other characters
   (punctuation, Latin, digits, emoji, newlines) become word boundaries.
8. Character runs longer than ``elongation_cap`` are squeezed down to the cap.
9. Whitespace collapses and the text splits into tokens.

The whole input is NFKC-folded first so presentation-form glyphs reach the
rules in canonical shape. Tag tokens are emitted verbatim (steps 5-8 never
touch them), so any tag lexicon survives; with the default Arabic lexicon the
output is also a fixpoint of the function itself.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DuplicateId

TAG_KINDS = ("url", "hashtag", "mention", "question", "exclamation")

DEFAULT_TAG_LEXICON: Dict[str, str] = {
    "url": "رابط",            # رابط
    "hashtag": "وسم",              # وسم
    "mention": "مستخدم",  # مستخدم
    "question": "سؤال",       # سؤال
    "exclamation": "تعجب",    # تعجب
}

# alef variants -> bare alef, alef maqsura -> ya, ta marbuta -> ha
DEFAULT_LETTER_MAP: Dict[str, str] = {
    "أ": "ا",
    "إ": "ا",
    "آ": "ا",
    "ٱ": "ا",
    "ى": "ي",
    "ة": "ه",
}

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
# Twitter handles are ASCII word characters only.
_MENTION_RE = re.compile(r"@[A-Za-z0-9_]+")
_HASHTAG_SPAN_RE = re.compile(r"#\w+")
_HASH_RE = re.compile(r"#")
_QUESTION_RE = re.compile(r"[?؟]")
_EXCLAMATION_RE = re.compile(r"!")

_DIACRITICS_RE = re.compile(r"[ً-ٰٟـ]")


@dataclass(frozen=True)
class NormalizationConfig:
    """Knobs for the rule chain; defaults follow the dialectal-tweet setup."""

    tag_lexicon: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_TAG_LEXICON))
    letter_map: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_LETTER_MAP))
    elongation_cap: int = 2
    min_words: int = 3
    drop_hashtag_body: bool = False

    def __post_init__(self) -> None:
        missing = [k for k in TAG_KINDS if k not in self.tag_lexicon]
        if missing:
            raise ValueError(f"tag_lexicon missing kinds: {missing}")
        tokens = [self.tag_lexicon[k] for k in TAG_KINDS]
        for tok in tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"tag token {tok!r} is empty or contains whitespace")
        if len(set(tokens)) != len(tokens):
            raise ValueError("tag tokens must be pairwise distinct")
        if self.elongation_cap < 1:
            raise ValueError("elongation_cap must be >= 1")
        if self.min_words < 1:
            raise ValueError("min_words must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "NormalizationConfig":
        kwargs = {}
        if "tag_lexicon" in data:
            lexicon = dict(DEFAULT_TAG_LEXICON)
            lexicon.update(data["tag_lexicon"])
            kwargs["tag_lexicon"] = lexicon
        if "letter_map" in data:
            kwargs["letter_map"] = dict(data["letter_map"])
        for key in ("elongation_cap", "min_words", "drop_hashtag_body"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "tag_lexicon": dict(self.tag_lexicon),
            "letter_map": dict(self.letter_map),
            "elongation_cap": self.elongation_cap,
            "min_words": self.min_words,
            "drop_hashtag_body": self.drop_hashtag_body,
        }


@dataclass
class RawTweet:
    """One input record: id, text, optional gold label, optional 3 votes."""

    id: str
    text: str
    votes: Optional[List[str]] = None
    label: Optional[str] = None


@dataclass
class NormalizedTweet:
    id: str
    tokens: List[str]
    label: Optional[str] = None
    votes: Optional[List[str]] = None

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def _is_arabic_letter(ch: str) -> bool:
    return 0x0600 <= ord(ch) <= 0x06FF and unicodedata.category(ch).startswith("L")


def _tag_spans(
    segments: List[Tuple[bool, str]], pattern: re.Pattern, tag: str
) -> List[Tuple[bool, str]]:
    """Replace every match inside plain-text segments with a tag segment."""
    out: List[Tuple[bool, str]] = []
    for is_tag, value in segments:
        if is_tag:
            out.append((is_tag, value))
            continue
        pos = 0
        for m in pattern.finditer(value):
            if m.start() > pos:
                out.append((False, value[pos:m.start()]))
            out.append((True, tag))
            pos = m.end()
        if pos < len(value):
            out.append((False, value[pos:]))
    return out


def _scrub(text: str) -> str:
    out: List[str] = []
    for ch in text:
        if _is_arabic_letter(ch):
            out.append(ch)
        elif unicodedata.category(ch) in ("Mn", "Me", "Cf"):
            continue  # in-word marks: delete without splitting the word
        else:
            out.append(" ")
    return "".join(out)


def _squeeze_runs(text: str, cap: int) -> str:
    pattern = re.compile(r"(.)\1{%d,}" % cap, re.DOTALL)
    return pattern.sub(lambda m: m.group(1) * cap, text)


def normalize_text(raw_text: str, config: Optional[NormalizationConfig] = None) -> List[str]:
    """Apply the full rule chain to one text; returns the token list.

    Total function: any input, including empty or fully non-Arabic text,
    yields a (possibly empty) list.
    """
    config = config or NormalizationConfig()
    text = unicodedata.normalize("NFKC", raw_text)

    segments: List[Tuple[bool, str]] = [(False, text)]
    segments = _tag_spans(segments, _URL_RE, config.tag_lexicon["url"])
    segments = _tag_spans(segments, _MENTION_RE, config.tag_lexicon["mention"])
    if config.drop_hashtag_body:
        segments = _tag_spans(segments, _HASHTAG_SPAN_RE, config.tag_lexicon["hashtag"])
    segments = _tag_spans(segments, _HASH_RE, config.tag_lexicon["hashtag"])
    segments = _tag_spans(segments, _QUESTION_RE, config.tag_lexicon["question"])
    segments = _tag_spans(segments, _EXCLAMATION_RE, config.tag_lexicon["exclamation"])

    letter_table = str.maketrans(config.letter_map)
    tokens: List[str] = []
    for is_tag, value in segments:
        if is_tag:
            tokens.append(value)
            continue
        value = _DIACRITICS_RE.sub("", value)
        value = value.translate(letter_table)
        value = _scrub(value)
        value = _squeeze_runs(value, config.elongation_cap)
        tokens.extend(value.split())
    return tokens


def normalize_dataset(
    tweets: Sequence[RawTweet], config: Optional[NormalizationConfig] = None
) -> List[NormalizedTweet]:
    """Normalize every tweet, dropping those shorter than ``min_words``.

    Input order is preserved; labels and votes are carried through unchanged.
    Raises DuplicateId when two tweets share an id.
    """
    config = config or NormalizationConfig()
    seen: set = set()
    out: List[NormalizedTweet] = []
    for tweet in tweets:
        if tweet.id in seen:
            raise DuplicateId(f"duplicate tweet id {tweet.id!r}")
        seen.add(tweet.id)
        tokens = normalize_text(tweet.text, config)
        if len(tokens) < config.min_words:
            continue
        out.append(
            NormalizedTweet(id=tweet.id, tokens=tokens, label=tweet.label, votes=tweet.votes)
        )
    return out
