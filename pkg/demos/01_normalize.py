"""
Normalizing raw Arabic tweets
=============================

Walks the normalization chain on a few deliberately messy tweets and
shows what each one becomes.
"""

from tweetact import NormalizationConfig, RawTweet, normalize_dataset, normalize_text

# A tweet with everything at once: a URL, a mention, a hashtag, Latin
# noise, diacritics, elongation, and mixed punctuation marks.
messy = "شاهد http://t.co/x3 @user #جميل جدااااا رائعٌ wow!! هل تعلم؟"
print("raw:   ", messy)
print("tokens:", normalize_text(messy))

# URLs and mentions collapse to placeholder tags; the hashtag mark becomes
# its own tag while the body stays as a word; question and exclamation
# marks each contribute one tag per occurrence.
for text in (
    "http://a.example وhttp://b.example",
    "@fulan شكرا @fulana",
    "#قهوه الصباح",
    "ممتاز!!! حقا؟؟",
):
    print(f"{text!r:45} -> {normalize_text(text)}")

# Letter folding: alef variants, alef maqsura, and ta marbuta each fold to
# one canonical letter, so spelling variants land on the same token.
for variant in ("أحمد", "إحمد", "آحمد", "احمد"):
    print(variant, "->", normalize_text(variant))

# Configuration: drop hashtag bodies entirely, keep a custom tag lexicon.
config = NormalizationConfig(drop_hashtag_body=True)
print("without hashtag bodies:", normalize_text("#قهوه الصباح جميل", config))

# Dataset-level normalization drops tweets shorter than min_words after
# cleaning. Tag tokens count as words.
raws = [
    RawTweet(id="1", text=messy, label="Expression"),
    RawTweet(id="2", text="قصير جدا", label="Expression"),  # two words: dropped
]
kept = normalize_dataset(raws)
print("kept ids:", [t.id for t in kept])
print("kept tokens:", kept[0].tokens)
