"""Command-line interface.

One subcommand per pipeline capability plus ``run`` for the whole chain.
Exit codes: 0 success, 2 configuration or usage error, and one distinct
code per failing stage (see STAGE_EXIT_CODES in pipeline).
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import io
from .augment import AugmentationPlan, apply_plan, balance_plan, stub_insert
from .backends import BackendDescriptor, backend_inserter
from .dataset import (
    SpeechActTaxonomy,
    adjudicate_dataset,
    class_distribution,
    merge_classes,
    stratified_split,
)
from .ensemble import argmax_labels, fuse, validate_matrix
from .errors import MalformedReport, StageError, TweetActError
from .explain import (
    DEFAULT_KERNEL_WIDTH,
    DEFAULT_RIDGE,
    DEFAULT_SAMPLES,
    DEFAULT_TOP_K,
    Explanation,
    explain,
)
from .metrics import build_report, confusion, round2
from .normalize import NormalizationConfig, normalize_dataset
from .pipeline import STAGE_EXIT_CODES, STAGES, load_config, run_pipeline
from .rng import derive_seed
from .version import VERSION

# Exit code used when a standalone subcommand fails, keyed by the pipeline
# stage it corresponds to.
_COMMAND_STAGE = {
    "adjudicate": "adjudicate",
    "normalize": "normalize",
    "split": "split",
    "stats": "split",
    "merge-classes": "split",
    "augment": "augment",
    "predict": "fuse",
    "evaluate": "evaluate",
    "explain": "classify",
    "report": "evaluate",
}


def _taxonomy(spec: str) -> SpeechActTaxonomy:
    names = tuple(name.strip() for name in spec.split(",") if name.strip())
    if not names:
        raise ValueError("--classes must list at least one class name")
    return SpeechActTaxonomy(names)


def _descriptor(args: argparse.Namespace) -> BackendDescriptor:
    return BackendDescriptor(
        kind=args.backend,
        location=getattr(args, "url", "") or "",
        model_id=getattr(args, "model", "") or "",
    )


def _weights(spec: Optional[str]) -> Optional[tuple]:
    if spec is None:
        return None
    return tuple(float(w) for w in spec.split(",") if w.strip())


def render_report(data: dict, fmt: str = "table") -> str:
    """Render an evaluation report dict as an aligned table or CSV."""
    per_class = data.get("per_class")
    if not isinstance(per_class, dict) or not per_class:
        raise MalformedReport("report has no per-class section")
    classes = data.get("classes") or list(per_class)
    rounded = data.get("rounded", {})
    rounded_per_class = rounded.get("per_class", {})

    def cell(name: str, key: str) -> float:
        entry = rounded_per_class.get(name) or {}
        if key in entry:
            return float(entry[key])
        full = per_class.get(name) or {}
        if key not in full:
            raise MalformedReport(f"report missing {key!r} for class {name!r}")
        return round2(float(full[key]))

    def aggregate_value(key: str) -> float:
        if key in rounded:
            return float(rounded[key])
        if key not in data:
            raise MalformedReport(f"report missing {key!r}")
        return round2(float(data[key]))

    accuracy = aggregate_value("accuracy")
    macro_f1 = aggregate_value("macro_f1")
    weighted_f1 = aggregate_value("weighted_f1")

    if fmt == "csv":
        lines = ["name,precision,recall,f1,support"]
        total = 0
        for name in classes:
            support = int(per_class.get(name, {}).get("support", 0))
            total += support
            lines.append(
                f"{name},{cell(name, 'precision'):.2f},{cell(name, 'recall'):.2f},"
                f"{cell(name, 'f1'):.2f},{support}"
            )
        # The aggregate row carries accuracy / macro-F1 / weighted-F1 in the
        # three metric columns.
        lines.append(f"aggregate,{accuracy:.2f},{macro_f1:.2f},{weighted_f1:.2f},{total}")
        return "\n".join(lines)

    width = max(len(name) for name in classes)
    lines = [(" " * width + " P    R    F1").rstrip()]
    for name in classes:
        lines.append(
            f"{name.ljust(width)} {cell(name, 'precision'):.2f} "
            f"{cell(name, 'recall'):.2f} {cell(name, 'f1'):.2f}"
        )
    lines.append("")
    lines.append(f"{'Accuracy'.ljust(11)} {accuracy:.2f}")
    lines.append(f"{'Macro-F1'.ljust(11)} {macro_f1:.2f}")
    lines.append(f"{'Weighted-F1'.ljust(11)} {weighted_f1:.2f}")
    return "\n".join(lines)


def render_bars(explanation: Explanation, bar_width: int = 24) -> str:
    """Aligned text bars for the top-k word weights."""
    pairs = explanation.top_k
    if not pairs:
        return "(no words)"
    name_width = max(len(word) for word, _ in pairs)
    peak = max(abs(weight) for _, weight in pairs) or 1.0
    lines = []
    for word, weight in pairs:
        length = round(abs(weight) / peak * bar_width)
        bar = "#" * max(length, 1) if weight else ""
        lines.append(f"{word.ljust(name_width)} {weight:+.4f} {bar}".rstrip())
    return "\n".join(lines)


def _cmd_adjudicate(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    tweets = io.read_raw_tweets(args.infile)
    labeled, report = adjudicate_dataset(tweets, taxonomy)
    io.write_raw_tweets(args.out, labeled.items)
    if args.report:
        io.save_json(args.report, report.as_dict())
    print(
        f"adjudicated {report.retained} of {report.total_in} tweets "
        f"({len(report.excluded_ids)} excluded)"
    )
    return 0


def _cmd_normalize(args: argparse.Namespace) -> int:
    config = (
        NormalizationConfig.from_dict(io.load_json(args.config))
        if args.config
        else NormalizationConfig()
    )
    tweets = io.read_raw_tweets(args.infile)
    normalized = normalize_dataset(tweets, config)
    io.write_normalized_tweets(args.out, normalized)
    print(f"normalized {len(normalized)} of {len(tweets)} tweets")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    dataset = io.read_labeled_dataset(args.infile, taxonomy)
    result = stratified_split(
        dataset, test_ratio=args.ratio, seed=args.seed, exact_total=args.exact_total
    )
    io.write_normalized_tweets(args.train_out, result.train.items)
    io.write_normalized_tweets(args.test_out, result.test.items)
    if args.manifest:
        manifest = result.manifest()
        manifest["excluded_ids"] = []
        io.save_json(args.manifest, manifest)
    print(f"split {len(dataset)} tweets into {len(result.train)} train / {len(result.test)} test")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    dataset = io.read_labeled_dataset(args.infile, taxonomy)
    distribution = class_distribution(dataset)
    print(
        json.dumps(
            {"total": distribution.total, "counts": distribution.as_dict()},
            ensure_ascii=False,
            indent=2,
        )
    )
    return 0


def _cmd_merge_classes(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    dataset = io.read_labeled_dataset(args.infile, taxonomy)
    merge_map = {str(k): str(v) for k, v in io.load_json(args.map).items()}
    merged = merge_classes(dataset, merge_map)
    io.write_normalized_tweets(args.out, merged.items)
    print("merged classes: " + ",".join(merged.taxonomy.classes))
    return 0


def _cmd_augment_plan(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    dataset = io.read_labeled_dataset(args.infile, taxonomy)
    plan = balance_plan(class_distribution(dataset))
    io.save_json(args.out, plan.as_dict())
    print(f"plan: {sum(plan.deficits)} synthetic tweets across {len(taxonomy)} classes")
    return 0


def _cmd_augment_apply(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    dataset = io.read_labeled_dataset(args.infile, taxonomy)
    if args.backend == "stub":
        inserter = stub_insert
    else:
        inserter = backend_inserter(_descriptor(args), args.top_k)
    if args.plan:
        raw = {str(k): int(v) for k, v in io.load_json(args.plan).items()}
        if set(raw) != set(taxonomy.classes):
            raise ValueError(
                f"plan classes {sorted(raw)} do not match --classes {list(taxonomy.classes)}"
            )
        # plan files map name -> deficit; align them to taxonomy order
        plan = AugmentationPlan(
            taxonomy.classes, tuple(raw[name] for name in taxonomy.classes)
        )
    else:
        plan = balance_plan(class_distribution(dataset))
    augmented = apply_plan(dataset, plan, inserter, args.seed)
    io.write_normalized_tweets(args.out, augmented.items)
    print(f"augmented {len(dataset)} -> {len(augmented)} tweets")

    if args.test_in:
        if not args.test_out:
            raise ValueError("--test-in requires --test-out")
        test_set = io.read_labeled_dataset(args.test_in, taxonomy)
        if args.train_only:
            io.write_normalized_tweets(args.test_out, test_set.items)
            print(f"copied test set unchanged ({len(test_set)} tweets)")
        else:
            test_plan = balance_plan(class_distribution(test_set))
            test_augmented = apply_plan(
                test_set, test_plan, inserter, derive_seed(args.seed, 1)
            )
            io.write_normalized_tweets(args.test_out, test_augmented.items)
            print(f"augmented test set {len(test_set)} -> {len(test_augmented)} tweets")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    matrices = [io.read_probability_matrix(path) for path in args.probs]
    taxonomy = SpeechActTaxonomy(matrices[0].class_names)
    for matrix in matrices:
        validate_matrix(matrix, taxonomy)
    fused = fuse(matrices, _weights(args.weights))
    predictions = argmax_labels(fused, taxonomy, ids=matrices[0].ids)
    io.write_predictions(args.out, predictions, taxonomy)
    print(f"wrote {len(predictions)} predictions from {len(matrices)} models")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    gold = io.read_labeled_dataset(args.gold, taxonomy)
    predictions = io.read_predictions(args.pred)
    cm = confusion(
        [item.label for item in gold.items],
        [label for _, label, _ in predictions],
        taxonomy,
        gold_ids=[item.id for item in gold.items],
        pred_ids=[id_ for id_, _, _ in predictions],
    )
    report = build_report(cm).to_dict()
    if args.out:
        io.save_json(args.out, report)
        print(f"wrote report to {args.out}")
    else:
        print(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True))
    return 0


def _cmd_explain(args: argparse.Namespace) -> int:
    taxonomy = _taxonomy(args.classes)
    target = taxonomy.index(args.target) if args.target else None
    explanation = explain(
        args.text,
        _descriptor(args),
        target_class=target,
        k=args.k,
        n_samples=args.samples,
        seed=args.seed,
        ridge=args.ridge,
        kernel_width=args.kernel_width,
        taxonomy=taxonomy,
    )
    payload = json.dumps(explanation.as_dict(), ensure_ascii=False, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(payload + "\n")
    else:
        print(payload)
    if args.bars:
        print(render_bars(explanation))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES["config"]
    manifest = run_pipeline(config, from_stage=args.from_stage)
    for stage, counts in manifest.stage_counts.items():
        summary = ", ".join(f"{key}={value}" for key, value in counts.items())
        print(f"{stage}: {summary}")
    print(f"manifest: {config.out_dir / 'manifest.json'}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    data = io.load_json(args.infile)
    print(render_report(data, args.format))
    return 0


def _add_io(parser: argparse.ArgumentParser, out_required: bool = True) -> None:
    parser.add_argument("--in", dest="infile", required=True, help="input JSONL file")
    parser.add_argument("--out", required=out_required, help="output file")


def _add_classes(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--classes",
        required=True,
        help="comma-separated class names in taxonomy order",
    )


def _add_backend(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=("stub", "http"), default="stub")
    parser.add_argument("--url", default="", help="http backend base URL")
    parser.add_argument("--model", default="", help="model id for the backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweetact",
        description="Arabic tweet speech-act pipeline: normalization, "
        "splitting, augmentation, ensembling, evaluation, explanation.",
    )
    parser.add_argument("--version", action="version", version=f"tweetact {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("adjudicate", help="majority-vote annotator labels")
    _add_io(sub)
    _add_classes(sub)
    sub.add_argument("--report", help="write adjudication report JSON here")
    sub.set_defaults(handler=_cmd_adjudicate)

    sub = commands.add_parser("normalize", help="normalize tweet text")
    _add_io(sub)
    sub.add_argument("--config", help="NormalizationConfig JSON file")
    sub.set_defaults(handler=_cmd_normalize)

    sub = commands.add_parser("split", help="stratified train/test split")
    sub.add_argument("--in", dest="infile", required=True, help="labeled JSONL file")
    _add_classes(sub)
    sub.add_argument("--ratio", type=float, default=0.2)
    sub.add_argument("--seed", type=int, default=42)
    sub.add_argument("--exact-total", action="store_true", dest="exact_total")
    sub.add_argument("--train-out", required=True)
    sub.add_argument("--test-out", required=True)
    sub.add_argument("--manifest", help="write split manifest JSON here")
    sub.set_defaults(handler=_cmd_split)

    sub = commands.add_parser("stats", help="class distribution of a labeled file")
    sub.add_argument("--in", dest="infile", required=True)
    _add_classes(sub)
    sub.set_defaults(handler=_cmd_stats)

    sub = commands.add_parser("merge-classes", help="merge classes via a JSON map")
    _add_io(sub)
    _add_classes(sub)
    sub.add_argument("--map", required=True, help="JSON file mapping old -> new names")
    sub.set_defaults(handler=_cmd_merge_classes)

    sub = commands.add_parser("augment", help="class-balancing augmentation")
    augment_commands = sub.add_subparsers(dest="augment_command", required=True)

    plan_parser = augment_commands.add_parser("plan", help="compute balance deficits")
    _add_io(plan_parser)
    _add_classes(plan_parser)
    plan_parser.set_defaults(handler=_cmd_augment_plan)

    apply_parser = augment_commands.add_parser("apply", help="generate synthetic tweets")
    _add_io(apply_parser)
    _add_classes(apply_parser)
    apply_parser.add_argument("--plan", help="plan JSON (default: balance to largest)")
    _add_backend(apply_parser)
    apply_parser.add_argument("--top-k", dest="top_k", type=int, default=5)
    apply_parser.add_argument("--seed", type=int, default=0)
    apply_parser.add_argument("--test-in", dest="test_in", help="optional test set")
    apply_parser.add_argument("--test-out", dest="test_out")
    apply_parser.add_argument(
        "--train-only",
        action="store_true",
        dest="train_only",
        help="copy the test set through unchanged",
    )
    apply_parser.set_defaults(handler=_cmd_augment_apply)

    sub = commands.add_parser("predict", help="fuse probability CSVs into labels")
    sub.add_argument("--probs", nargs="+", required=True, help="one CSV per model")
    sub.add_argument("--weights", help="comma-separated positive weights")
    sub.add_argument("--out", required=True, help="predictions TSV")
    sub.set_defaults(handler=_cmd_predict)

    sub = commands.add_parser("evaluate", help="score predictions against gold labels")
    sub.add_argument("--gold", required=True, help="labeled JSONL file")
    sub.add_argument("--pred", required=True, help="predictions TSV")
    _add_classes(sub)
    sub.add_argument("--out", help="write report JSON here (default: stdout)")
    sub.set_defaults(handler=_cmd_evaluate)

    sub = commands.add_parser("explain", help="explain one tweet's prediction")
    sub.add_argument("--text", required=True)
    _add_backend(sub)
    _add_classes(sub)
    sub.add_argument("--class", dest="target", help="target class name (default: argmax)")
    sub.add_argument("--k", type=int, default=DEFAULT_TOP_K)
    sub.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    sub.add_argument("--kernel-width", dest="kernel_width", type=float, default=DEFAULT_KERNEL_WIDTH)
    sub.add_argument("--out", help="write Explanation JSON here (default: stdout)")
    sub.add_argument("--bars", action="store_true", help="also print text bars")
    sub.set_defaults(handler=_cmd_explain)

    sub = commands.add_parser("run", help="run the full pipeline from a config file")
    sub.add_argument("--config", required=True, help="pipeline config JSON")
    sub.add_argument("--from", dest="from_stage", choices=STAGES, help="resume at stage")
    sub.set_defaults(handler=_cmd_run)

    sub = commands.add_parser("report", help="render an evaluation report")
    sub.add_argument("--in", dest="infile", required=True, help="report JSON")
    sub.add_argument("--format", choices=("table", "csv"), default="table")
    sub.set_defaults(handler=_cmd_report)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES[exc.stage]
    except (TweetActError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        stage = _COMMAND_STAGE.get(args.command)
        return STAGE_EXIT_CODES.get(stage, STAGE_EXIT_CODES["config"])


if __name__ == "__main__":
    sys.exit(main())
