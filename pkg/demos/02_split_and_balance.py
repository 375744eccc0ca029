"""
From annotator votes to balanced training data
==============================================

Adjudicates three-way votes, makes a reproducible stratified split, then
levels class sizes with synthetic word insertion.
"""

import random

from tweetact import (
    LabeledDataset,
    RawTweet,
    SpeechActTaxonomy,
    adjudicate_dataset,
    balance_dataset,
    balance_plan,
    class_distribution,
    normalize_dataset,
    stratified_split,
)

taxonomy = SpeechActTaxonomy(("Exp", "Que", "Req", "Ass", "Rec", "Oth"))

# Build a toy corpus of voted tweets. Most triples agree 2-of-3 or 3-of-3;
# a few disagree three ways and will be excluded.
words = "جميل رائع صباح قهوه شكرا سؤال كلام يوم خير نور حلو بحر".split()
rng = random.Random(11)
sizes = {"Exp": 40, "Que": 25, "Req": 15, "Ass": 10, "Rec": 6, "Oth": 4}
raws = []
for name, n in sizes.items():
    for i in range(n):
        text = " ".join(rng.sample(words, rng.randint(3, 6)))
        other = rng.choice([c for c in taxonomy.classes if c != name])
        votes = [name, name, rng.choice([name, other])]
        raws.append(RawTweet(id=f"{name}-{i}", text=text, votes=votes))
raws.append(RawTweet(id="chaos", text="كلام بلا اتفاق ابدا", votes=["Exp", "Que", "Req"]))

labeled, report = adjudicate_dataset(raws, taxonomy)
print(f"adjudicated {report.total_in} tweets, excluded {report.excluded_ids}")

# Normalize the retained tweets (labels ride along), then split 80/20.
# Same seed, same split: the assignment is a pure function of (ids, seed).
normalized = normalize_dataset(labeled.items)
dataset = LabeledDataset(taxonomy, normalized)
split = stratified_split(dataset, test_ratio=0.2, seed=42)
print("train:", class_distribution(split.train).as_dict())
print("test: ", class_distribution(split.test).as_dict())

again = stratified_split(dataset, test_ratio=0.2, seed=42)
assert [t.id for t in again.test.items] == [t.id for t in split.test.items]
print("rerun with seed 42 reproduces the same test ids")

# Balance the training side up to its largest class. Each synthetic tweet
# is a copy of a real one with a single neutral word inserted.
plan = balance_plan(class_distribution(split.train))
print("deficits:", plan.as_dict())
balanced = balance_dataset(split.train, seed=7)
print("after balancing:", class_distribution(balanced).as_dict())

synthetic = [t for t in balanced.items if "#aug" in t.id]
sample = synthetic[0]
source = next(t for t in split.train.items if t.id == sample.source_id)
print(f"source {source.id}: {source.tokens}")
print(f"synth  {sample.id}: {sample.tokens}")
