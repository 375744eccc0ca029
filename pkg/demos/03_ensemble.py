"""
Fusing model probabilities and scoring the result
=================================================

Classifies a small test set with two deterministic stub backends, fuses
their probability matrices with weighted soft voting, and prints an
evaluation report.
"""

import random

from tweetact import (
    BackendDescriptor,
    SpeechActTaxonomy,
    aggregate,
    argmax_labels,
    classify_batch,
    confusion,
    fuse,
    per_class_metrics,
)

taxonomy = SpeechActTaxonomy(("Exp", "Que", "Req", "Ass", "Rec", "Oth"))

# A labeled test set. The stub backend is a hash-based fake: deterministic
# and text-sensitive, so fusion and scoring behave like the real thing
# without any model downloads.
words = "جميل رائع صباح قهوه شكرا سؤال كلام يوم خير نور".split()
rng = random.Random(3)
texts, gold = [], []
for i in range(40):
    texts.append(" ".join(rng.sample(words, 4)))
    gold.append(rng.randrange(len(taxonomy)))
ids = [f"t{i}" for i in range(40)]

matrices = []
for name in ("model-a", "model-b"):
    backend = BackendDescriptor(kind="stub", model_id=name)
    matrix = classify_batch(texts, backend, taxonomy, ids=ids)
    matrices.append(matrix)
    print(f"{name}: first row {[round(float(p), 3) for p in matrix.rows[0]]}")

# Weighted soft voting: each model's row is scaled by its weight, cells
# are summed, argmax picks the class. Model order never changes the sums.
fused = fuse(matrices, weights=[1.0, 2.0])
swapped = fuse(matrices[::-1], weights=[2.0, 1.0])
assert (fused == swapped).all()
print("fusion is order-independent")

predictions = argmax_labels(fused, taxonomy, ids=ids)
print("first prediction:", predictions[0])

# Score against gold labels: the stubs guess at chance, so expect accuracy
# near 1/6.
cm = confusion(gold, [p.label for p in predictions], taxonomy)
for m in per_class_metrics(cm):
    print(f"{m.name}: P={m.precision:.2f} R={m.recall:.2f} F1={m.f1:.2f} n={m.support}")
print({k: round(v, 3) for k, v in aggregate(cm).items()})
