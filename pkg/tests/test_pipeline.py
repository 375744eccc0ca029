"""Pipeline: config validation, staged runs, resumability, failure modes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from conftest import SHORT_CLASSES, make_vote_corpus
from tweetact.backends import BackendDescriptor
from tweetact.dataset import class_distribution
from tweetact.errors import StageError
from tweetact.io import load_json, read_labeled_dataset, read_normalized_tweets
from tweetact.pipeline import (
    ARTIFACTS,
    STAGE_EXIT_CODES,
    STAGES,
    PipelineConfig,
    load_config,
    probs_filename,
    run_pipeline,
)

COUNTS = {"Exp": 20, "Que": 12, "Req": 8, "Ass": 8, "Rec": 6, "Oth": 6}


def write_corpus(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def base_data(**overrides) -> dict:
    data = {
        "input": "corpus.jsonl",
        "out_dir": "out",
        "classes": list(SHORT_CLASSES),
        "backends": [
            {"kind": "stub", "model_id": "m1"},
            {"kind": "stub", "model_id": "m2"},
        ],
        "split": {"ratio": 0.2, "seed": 42},
        "augmentation": {"enabled": True, "train_only": True, "seed": 7},
    }
    data.update(overrides)
    return data


def make_config(tmp_path: Path, corpus=None, **overrides) -> PipelineConfig:
    rows = corpus if corpus is not None else make_vote_corpus(COUNTS, 3, 4)[0]
    write_corpus(tmp_path / "corpus.jsonl", rows)
    return PipelineConfig.from_dict(base_data(**overrides), base_dir=tmp_path)


def test_stage_registry_consistency():
    assert STAGES == (
        "adjudicate", "normalize", "split", "augment", "classify", "fuse", "evaluate",
    )
    assert STAGE_EXIT_CODES["config"] == 2
    assert [STAGE_EXIT_CODES[s] for s in STAGES] == [3, 4, 5, 6, 7, 8, 9]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("input"),
        lambda d: d.pop("out_dir"),
        lambda d: d.pop("classes"),
        lambda d: d.pop("backends"),
        lambda d: d.update(classes="Exp,Que"),
        lambda d: d.update(classes=["Exp", 2]),
        lambda d: d.update(backends=[]),
        lambda d: d.update(weights=[1.0]),
        lambda d: d.update(weights=[1.0, 0.0]),
        lambda d: d.update(weights=[1.0, True]),
        lambda d: d.update(split={"ratio": 0.0}),
        lambda d: d.update(split={"ratio": 1}),
        lambda d: d.update(split={"seed": True}),
        lambda d: d.update(split={"exact_total": "yes"}),
        lambda d: d.update(augmentation={"enabled": "yes"}),
        lambda d: d.update(augmentation={"backend": {"kind": "file", "location": "x.csv"}}),
        lambda d: d.update(adjudicate="no"),
        lambda d: d.update(input=7),
    ],
)
def test_config_validation_errors(mutate):
    data = base_data()
    mutate(data)
    with pytest.raises(ValueError):
        PipelineConfig.from_dict(data)


def test_config_hash_is_canonical():
    a = base_data()
    b = dict(reversed(list(base_data().items())))  # same content, new order
    assert PipelineConfig.from_dict(a).config_hash == PipelineConfig.from_dict(b).config_hash
    c = base_data(split={"ratio": 0.2, "seed": 43})
    assert PipelineConfig.from_dict(c).config_hash != PipelineConfig.from_dict(a).config_hash


def test_config_resolves_relative_paths(tmp_path):
    data = base_data(
        backends=[{"kind": "file", "location": "probs.csv"}],
        weights=[2.0],
    )
    config = PipelineConfig.from_dict(data, base_dir=tmp_path)
    assert config.input == tmp_path / "corpus.jsonl"
    assert config.out_dir == tmp_path / "out"
    assert config.backends[0].location == str(tmp_path / "probs.csv")
    assert config.weights == (2.0,)
    absolute = base_data(input="/abs/in.jsonl")
    assert PipelineConfig.from_dict(absolute, base_dir=tmp_path).input == Path("/abs/in.jsonl")


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(base_data()), encoding="utf-8")
    config = load_config(path)
    assert config.out_dir == tmp_path / "out"
    path.write_text("[1]")
    with pytest.raises(ValueError):
        load_config(path)


def test_missing_input_fails_before_any_stage(tmp_path):
    config = PipelineConfig.from_dict(base_data(), base_dir=tmp_path)
    with pytest.raises(FileNotFoundError) as info:
        run_pipeline(config)
    assert str(tmp_path / "corpus.jsonl") in str(info.value)
    assert not (tmp_path / "out").exists()


def test_unknown_resume_stage_rejected(tmp_path):
    config = make_config(tmp_path)
    with pytest.raises(ValueError, match="unknown stage"):
        run_pipeline(config, from_stage="deploy")


def test_full_run_artifacts_and_counts(tmp_path):
    rows, expected = make_vote_corpus(COUNTS, 3, 4)
    config = make_config(tmp_path, corpus=rows)
    manifest = run_pipeline(config)

    out = tmp_path / "out"
    for name in ARTIFACTS.values():
        assert (out / name).exists(), name
    assert (out / "probs_00_m1.csv").exists()
    assert (out / "probs_01_m2.csv").exists()

    counts = manifest.stage_counts
    assert counts["adjudicate"] == {
        "in": expected["total"],
        "retained": expected["retained"],
        "excluded": expected["excluded"],
    }
    assert counts["normalize"]["out"] == expected["normalized"]
    assert counts["split"]["train"] + counts["split"]["test"] == expected["normalized"]
    assert counts["augment"]["test"] == counts["split"]["test"]  # train_only
    assert counts["fuse"]["predictions"] == counts["augment"]["test"]
    assert counts["evaluate"]["total"] == counts["augment"]["test"]
    assert counts["classify"]["models"] == 2

    # train side got balanced to its largest class
    train = read_labeled_dataset(out / ARTIFACTS["train_final"], config.taxonomy)
    dist = class_distribution(train).as_dict()
    assert len(set(dist.values())) == 1
    assert counts["augment"]["train"] == sum(dist.values())

    saved = load_json(out / ARTIFACTS["manifest"])
    assert saved == manifest.as_dict()
    assert saved["config_hash"] == config.config_hash
    assert str(config.input) in saved["input_digests"]
    assert saved["version"]


def test_rerun_is_byte_identical(tmp_path):
    rows, _ = make_vote_corpus(COUNTS, 2, 2)
    first = make_config(tmp_path, corpus=rows)
    run_pipeline(first)
    second = PipelineConfig.from_dict(base_data(out_dir="out2"), base_dir=tmp_path)
    run_pipeline(second)
    for name in ("predictions", "report", "confusion", "train_final", "split_manifest"):
        a = (tmp_path / "out" / ARTIFACTS[name]).read_bytes()
        b = (tmp_path / "out2" / ARTIFACTS[name]).read_bytes()
        assert a == b, name


def test_resume_reproduces_downstream_artifacts(tmp_path):
    config = make_config(tmp_path)
    run_pipeline(config)
    out = tmp_path / "out"
    reference = {
        name: (out / ARTIFACTS[name]).read_bytes()
        for name in ("predictions", "report", "confusion", "test_final")
    }
    (out / ARTIFACTS["predictions"]).unlink()
    (out / ARTIFACTS["report"]).unlink()
    manifest = run_pipeline(config, from_stage="fuse")
    for name, blob in reference.items():
        assert (out / ARTIFACTS[name]).read_bytes() == blob, name
    assert manifest.stage_counts["fuse"]["predictions"] > 0


def test_stage_error_names_failing_stage(tmp_path):
    csv_path = tmp_path / "frozen.csv"
    csv_path.write_text(
        "id," + ",".join(SHORT_CLASSES) + "\nbogus,0.5,0.1,0.1,0.1,0.1,0.1\n"
    )
    config = make_config(
        tmp_path,
        backends=[{"kind": "stub"}, {"kind": "file", "location": "frozen.csv"}],
    )
    with pytest.raises(StageError) as info:
        run_pipeline(config)
    assert info.value.stage == "classify"
    assert STAGE_EXIT_CODES[info.value.stage] == 7
    out = tmp_path / "out"
    for name in ("adjudicated", "normalized", "train", "test", "train_final"):
        assert (out / ARTIFACTS[name]).exists(), name  # earlier stages intact
    assert not (out / ARTIFACTS["predictions"]).exists()


def test_missing_file_backend_csv_fails_upfront(tmp_path):
    config = make_config(
        tmp_path, backends=[{"kind": "file", "location": "absent.csv"}]
    )
    with pytest.raises(FileNotFoundError):
        run_pipeline(config)


def test_adjudication_disabled_requires_labels(tmp_path):
    rows = [{"id": "a", "text": "كلام جميل يوم"}]
    config = make_config(tmp_path, corpus=rows, adjudicate=False)
    with pytest.raises(StageError) as info:
        run_pipeline(config)
    assert info.value.stage == "adjudicate"
    assert STAGE_EXIT_CODES[info.value.stage] == 3


def test_adjudication_disabled_passes_labeled_rows(tmp_path):
    rows = [
        {"id": f"r{i}-{name}", "text": "كلام جميل يوم سعيد", "label": name}
        for name in SHORT_CLASSES
        for i in range(4)
    ]
    config = make_config(tmp_path, corpus=rows, adjudicate=False,
                         split={"ratio": 0.25, "seed": 1})
    manifest = run_pipeline(config)
    assert manifest.stage_counts["adjudicate"] == {
        "in": 24, "retained": 24, "excluded": 0,
    }
    report = load_json(tmp_path / "out" / ARTIFACTS["adjudication_report"])
    assert report["excluded_ids"] == []


def test_augmentation_disabled_is_pass_through(tmp_path):
    config = make_config(tmp_path, augmentation={"enabled": False})
    run_pipeline(config)
    out = tmp_path / "out"
    train = read_normalized_tweets(out / ARTIFACTS["train"])
    final = read_normalized_tweets(out / ARTIFACTS["train_final"])
    assert [t.id for t in final] == [t.id for t in train]
    plan = load_json(out / ARTIFACTS["augment_plan"])
    assert plan["enabled"] is False
    assert plan["train_deficits"] == {}


def test_train_only_toggle_controls_test_side(tmp_path):
    config = make_config(
        tmp_path, augmentation={"enabled": True, "train_only": False, "seed": 7}
    )
    run_pipeline(config)
    out = tmp_path / "out"
    test_final = read_labeled_dataset(out / ARTIFACTS["test_final"], config.taxonomy)
    dist = class_distribution(test_final).as_dict()
    assert len(set(dist.values())) == 1  # test side balanced too
    plan = load_json(out / ARTIFACTS["augment_plan"])
    assert plan["test_deficits"]  # non-empty deficits were recorded

    only = PipelineConfig.from_dict(
        base_data(out_dir="out2",
                  augmentation={"enabled": True, "train_only": True, "seed": 7}),
        base_dir=tmp_path,
    )
    run_pipeline(only)
    test_plain = read_normalized_tweets(tmp_path / "out2" / ARTIFACTS["test"])
    test_kept = read_normalized_tweets(tmp_path / "out2" / ARTIFACTS["test_final"])
    assert [t.id for t in test_kept] == [t.id for t in test_plain]


def test_probs_filename_slugging():
    assert probs_filename(0, BackendDescriptor("stub", model_id="m1")) == "probs_00_m1.csv"
    assert (
        probs_filename(3, BackendDescriptor("stub", model_id="a b/c"))
        == "probs_03_a_b_c.csv"
    )
    assert probs_filename(1, BackendDescriptor("stub")) == "probs_01_stub.csv"


def test_confusion_csv_layout(tmp_path):
    config = make_config(tmp_path)
    run_pipeline(config)
    lines = (tmp_path / "out" / ARTIFACTS["confusion"]).read_text().splitlines()
    assert lines[0] == "gold," + ",".join(SHORT_CLASSES)
    assert len(lines) == 7
    total = sum(int(v) for line in lines[1:] for v in line.split(",")[1:])
    report = load_json(tmp_path / "out" / ARTIFACTS["report"])
    assert total == sum(e["support"] for e in report["per_class"].values())
