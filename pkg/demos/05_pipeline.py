"""
Running the whole pipeline from one config
==========================================

Builds a voted corpus on disk, writes a pipeline config, runs every stage,
and inspects the artifacts and run manifest. The same run is available on
the command line as `tweetact run --config config.json`.
"""

import json
import random
import tempfile
from pathlib import Path

from tweetact import PipelineConfig, run_pipeline

CLASSES = ["Exp", "Que", "Req", "Ass", "Rec", "Oth"]
words = "جميل رائع صباح قهوه شكرا سؤال كلام يوم خير نور حلو بحر".split()

workdir = Path(tempfile.mkdtemp(prefix="tweetact-demo-"))
rng = random.Random(2)

# Corpus rows are JSONL: id, text, and three annotator votes each.
with open(workdir / "corpus.jsonl", "w", encoding="utf-8") as handle:
    for i in range(300):
        label = CLASSES[min(rng.randrange(12), 5)]  # skewed class sizes
        row = {
            "id": f"t{i}",
            "text": " ".join(rng.sample(words, rng.randint(3, 7))),
            "votes": [label, label, rng.choice(CLASSES)],
        }
        handle.write(json.dumps(row, ensure_ascii=False) + "\n")

# The config names the input, the class list, the model backends with
# their fusion weights, and the split/augmentation settings. Stub backends
# keep the demo offline; swap in {"kind": "http", "url": ...} for real
# model servers.
config_data = {
    "input": "corpus.jsonl",
    "out_dir": "out",
    "classes": CLASSES,
    "backends": [
        {"kind": "stub", "model_id": "araBERT-stand-in"},
        {"kind": "stub", "model_id": "qaribert-stand-in"},
    ],
    "weights": [2.0, 1.0],
    "split": {"ratio": 0.2, "seed": 42},
    "augmentation": {"enabled": True, "train_only": True, "seed": 7},
}
with open(workdir / "config.json", "w", encoding="utf-8") as handle:
    json.dump(config_data, handle, indent=2)

config = PipelineConfig.from_dict(config_data, base_dir=workdir)
manifest = run_pipeline(config)

print("stages:")
for stage, counts in manifest.stage_counts.items():
    print(f"  {stage:10} {counts}")
print("config hash:", manifest.config_hash[:16], "...")

out = workdir / "out"
print("artifacts:", sorted(p.name for p in out.iterdir()))

# The evaluation report is plain JSON; the predictions file is TSV.
report = json.loads((out / "report.json").read_text(encoding="utf-8"))
print("accuracy:", round(report["accuracy"], 3))
first = (out / "predictions.tsv").read_text(encoding="utf-8").splitlines()[0]
print("first prediction:", first)

# Re-running a stage from the middle reuses everything upstream of it and
# reproduces identical outputs downstream.
before = (out / "predictions.tsv").read_bytes()
run_pipeline(config, from_stage="fuse")
assert (out / "predictions.tsv").read_bytes() == before
print("resume from 'fuse' reproduced predictions byte-for-byte")
