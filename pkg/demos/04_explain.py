"""
Explaining a single prediction
==============================

Fits a local linear surrogate around one tweet and shows which words push
the predicted class up or down.
"""

from tweetact import explain

# A classifier whose behavior we know exactly: probability of class 0 is
# 0.1, plus 0.8 whenever the word "جميل" is present, minus 0.3 for "سيء".
# The explainer only ever calls it on perturbed texts, so any callable
# taking a list of texts and returning probability rows works, including
# an HTTP backend.


def classifier(texts):
    rows = []
    for text in texts:
        words = set(text.split())
        p = 0.1 + 0.8 * ("جميل" in words) - 0.05 * ("سيء" in words)
        rows.append([p, 1.0 - p])
    return rows


tweet = "يوم جميل جدا لكن الطقس سيء قليلا"

# With 7 unique words the mask space is only 2^7, so the surrogate is fit
# on every possible word subset instead of a random sample.
result = explain(tweet, classifier, seed=1)
print("tweet:          ", tweet)
print("class probs:    ", [round(p, 3) for p in result.class_probabilities])
print("target class:   ", result.target_class)
print("intercept:      ", round(result.intercept, 4))
for word, weight in result.top_k:
    bar = "#" * int(abs(weight) * 30)
    print(f"  {word:8} {weight:+.4f} {bar}")

# The recovered weights match the classifier we wrote: "جميل" carries
# about +0.8, "سيء" about -0.05, everything else is noise-level.
strongest = result.top_k[0]
assert strongest[0] == "جميل" and 0.75 < strongest[1] < 0.85

# Words are dropped by type: every occurrence of a masked word vanishes,
# and a tweet reduced to nothing is kept at maximum distance.
result2 = explain(tweet, classifier, target_class=1, seed=1)
print("against class 1:", round(result2.top_k[0][1], 4), result2.top_k[0][0])
