"""Command-line pipeline: preprocess, sketch, segment, train, emit, summarize, evaluate."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, cutmodel, generate, intent, metrics, phrase, segment, sketch

KNOWN_CONFIG_KEYS = {
    "trees",
    "rules",
    "stopwords",
    "model",
    "probs",
    "lcs_min",
    "min_content",
    "lcs_target",
    "cut_threshold",
    "sim_variant",
    "sketch_scope",
    "style",
    "mode",
    "generator",
    "max_tokens",
    "stem",
    "seed",
}


class CliError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise CliError(f"config {path} must be a JSON object")
    unknown = set(config) - KNOWN_CONFIG_KEYS
    if unknown:
        raise CliError(f"config {path} has unknown keys: {sorted(unknown)}")
    return config


def _pick(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value wins over config file value wins over default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _say(args: argparse.Namespace, message: str) -> None:
    if not args.quiet:
        print(message)


def _warn(args: argparse.Namespace, message: str) -> None:
    if not args.quiet:
        print(f"warning: {message}", file=sys.stderr)


def _load_rules(args, config) -> list[intent.LabelingRule]:
    rules_path = _pick(args, config, "rules")
    return intent.load_rules(rules_path) if rules_path else intent.default_rules()


def _load_samples(path: str, split: str = "infer") -> corpus.LoadReport:
    try:
        return corpus.load_corpus_report(path, split)
    except corpus.CorpusError as exc:
        raise CliError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _write_jsonl(path: str, records: list[dict]) -> None:
    try:
        with Path(path).open("w", encoding="utf-8") as fout:
            for record in records:
                fout.write(json.dumps(record, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def _keyphrases_for(sample, args, config, warn):
    """Per-turn kept phrases for one sample, with tree fallback on mismatch."""
    trees = getattr(args, "_trees_cache", None)
    lcs_min = int(_pick(args, config, "lcs_min", 2))
    min_content = int(_pick(args, config, "min_content", 1))
    target = _pick(args, config, "lcs_target", "summary")
    stopwords_path = _pick(args, config, "stopwords")
    stopwords = (
        phrase.load_stopwords(stopwords_path) if stopwords_path else phrase.DEFAULT_STOPWORDS
    )
    keyphrases = {}
    for turn in sample.dialogue.turns:
        tree = trees.get((sample.dialogue.id, turn.index)) if trees else None
        try:
            kept = phrase.extract_key_phrases(
                turn,
                tree,
                sample.summary,
                min_content=min_content,
                stopwords=stopwords,
                lcs_min=lcs_min,
                target=target,
            )
        except ValueError as exc:
            warn(f"{sample.dialogue.id}: {exc}; falling back to n-gram spans")
            kept = phrase.extract_key_phrases(
                turn,
                None,
                sample.summary,
                min_content=min_content,
                stopwords=stopwords,
                lcs_min=lcs_min,
                target=target,
            )
        keyphrases[turn.index] = kept
    return keyphrases


def _attach_trees(args, config) -> None:
    trees_path = _pick(args, config, "trees")
    if trees_path:
        try:
            args._trees_cache = phrase.load_trees(trees_path)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load trees {trees_path}: {exc}") from exc
    else:
        args._trees_cache = None


def cmd_preprocess(args, config) -> int:
    report = _load_samples(args.input, split="infer")
    try:
        corpus.write_corpus(report.samples, args.output)
    except OSError as exc:
        raise CliError(f"cannot write {args.output}: {exc}") from exc
    _say(
        args,
        f"records: {len(report.samples)}  skipped: {report.skipped_empty}  "
        f"merged turns: {report.merged_turns}",
    )
    return 0


def cmd_sketch(args, config) -> int:
    report = _load_samples(args.input)
    _attach_trees(args, config)
    rules = _load_rules(args, config)
    style = _pick(args, config, "style", sketch.STYLE_INDEX)
    records = []
    skipped = 0
    for sample in report.samples:
        if sample.summary is None:
            skipped += 1
            _warn(args, f"{sample.dialogue.id}: no summary, skipped")
            continue
        intents = intent.label_dialogue(sample.dialogue, rules)
        keyphrases = _keyphrases_for(sample, args, config, lambda m: _warn(args, m))
        built = sketch.build_sketch(sample.dialogue, intents, keyphrases)
        records.append(
            {"id": sample.dialogue.id, "sketch": sketch.serialize_sketch(built, style)}
        )
    _write_jsonl(args.output, records)
    _say(args, f"sketches: {len(records)}  skipped: {skipped}")
    return 0


def cmd_segment(args, config) -> int:
    report = _load_samples(args.input)
    sim = segment.make_sim(_pick(args, config, "sim_variant", "f1"))
    records = []
    skipped = 0
    for sample in report.samples:
        if sample.summary is None:
            skipped += 1
            _warn(args, f"{sample.dialogue.id}: no summary, skipped")
            continue
        try:
            seg = segment.align_segments(sample.dialogue, sample.summary, sim)
        except ValueError as exc:
            skipped += 1
            _warn(args, str(exc))
            continue
        records.append(
            {
                "id": sample.dialogue.id,
                "cuts": list(seg.cuts),
                "n_turns": seg.n_turns,
            }
        )
    _write_jsonl(args.output, records)
    _say(args, f"segmentations: {len(records)}  skipped: {skipped}")
    return 0


def _load_labels(path: str) -> dict[str, list[int]]:
    labels = {}
    try:
        with Path(path).open(encoding="utf-8") as fin:
            for line_no, line in enumerate(fin, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                labels[str(record["id"])] = [int(c) for c in record["cuts"]]
    except OSError as exc:
        raise CliError(f"cannot read labels {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"labels {path} line {line_no}: {exc}") from exc
    return labels


def cmd_train_cutter(args, config) -> int:
    report = _load_samples(args.input)
    labels = _load_labels(args.labels)
    rules = _load_rules(args, config)
    samples = []
    for sample in report.samples:
        cuts = labels.get(sample.dialogue.id)
        if cuts is None:
            _warn(args, f"{sample.dialogue.id}: no pseudo-labels, skipped")
            continue
        intents = intent.label_dialogue(sample.dialogue, rules)
        samples.append((sample.dialogue, intents, cuts))
    cfg = cutmodel.TrainConfig(
        lr=float(_pick(args, config, "lr", 0.1)),
        epochs=int(_pick(args, config, "epochs", 1000)),
        seed=int(_pick(args, config, "seed", 0)),
        l2=float(_pick(args, config, "l2", 1e-4)),
    )
    try:
        model = cutmodel.train(cutmodel.zero_model(), samples, cfg)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    cutmodel.save_model(model, args.model_out)
    _say(args, f"trained on {len(samples)} dialogues -> {args.model_out}")
    return 0


def cmd_predict_cuts(args, config) -> int:
    report = _load_samples(args.input)
    try:
        model = cutmodel.load_model(args.model)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load model {args.model}: {exc}") from exc
    rules = _load_rules(args, config)
    threshold = float(_pick(args, config, "cut_threshold", 0.5))
    records = []
    for sample in report.samples:
        intents = intent.label_dialogue(sample.dialogue, rules)
        probs = cutmodel.predict_probs(model, sample.dialogue, intents)
        seg = segment.cuts_from_probs(probs, threshold)
        records.append(
            {"id": sample.dialogue.id, "probs": probs, "cuts": list(seg.cuts)}
        )
    _write_jsonl(args.output, records)
    _say(args, f"predictions: {len(records)}")
    return 0


def cmd_emit_training(args, config) -> int:
    report = _load_samples(args.input)
    _attach_trees(args, config)
    rules = _load_rules(args, config)
    scope = _pick(args, config, "sketch_scope", "segment")
    records = []
    skipped = 0
    for sample in report.samples:
        if sample.summary is None:
            skipped += 1
            _warn(args, f"{sample.dialogue.id}: no summary, skipped")
            continue
        intents = intent.label_dialogue(sample.dialogue, rules)
        try:
            seg = segment.align_segments(sample.dialogue, sample.summary)
        except ValueError as exc:
            skipped += 1
            _warn(args, str(exc))
            continue
        keyphrases = _keyphrases_for(sample, args, config, lambda m: _warn(args, m))
        built = sketch.build_sketch(sample.dialogue, intents, keyphrases)
        for pair in generate.emit_training_pairs(sample, seg, built, scope):
            records.append(
                {
                    "id": pair.id,
                    "segment": pair.segment_index,
                    "source": pair.source,
                    "target": pair.target,
                }
            )
    _write_jsonl(args.output, records)
    _say(args, f"pairs: {len(records)}  skipped: {skipped}")
    return 0


def _load_probs(path: str) -> dict[str, list[float]]:
    probs = {}
    try:
        with Path(path).open(encoding="utf-8") as fin:
            for line_no, line in enumerate(fin, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                probs[str(record["id"])] = [float(p) for p in record["probs"]]
    except OSError as exc:
        raise CliError(f"cannot read probs {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"probs {path} line {line_no}: {exc}") from exc
    return probs


def _parse_mode(raw: str) -> tuple[str, int | None]:
    if raw == "auto":
        return generate.MODE_AUTO, None
    if raw == "one":
        return generate.MODE_ONE, None
    if raw.startswith("k="):
        try:
            k = int(raw[2:])
        except ValueError as exc:
            raise CliError(f"bad mode {raw!r}: K must be an integer") from exc
        return generate.MODE_FIXED, k
    raise CliError(f"unknown mode {raw!r} (expected auto, one, or k=K)")


def cmd_summarize(args, config) -> int:
    report = _load_samples(args.input)
    rules = _load_rules(args, config)
    mode_raw = _pick(args, config, "mode", "auto")
    mode, k = _parse_mode(mode_raw)
    generator_spec = _pick(args, config, "generator", "echo")
    threshold = float(_pick(args, config, "cut_threshold", 0.5))
    max_tokens = int(_pick(args, config, "max_tokens", 128))

    model = None
    model_path = _pick(args, config, "model")
    if model_path:
        try:
            model = cutmodel.load_model(model_path)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot load model {model_path}: {exc}") from exc
    probs_path = _pick(args, config, "probs")
    injected = _load_probs(probs_path) if probs_path else {}

    records = []
    for sample in report.samples:
        dialogue = sample.dialogue
        intents = intent.label_dialogue(dialogue, rules)

        if generator_spec == "longest":
            n_sentences = k if mode == generate.MODE_FIXED else (1 if mode == generate.MODE_ONE else 3)
            records.append(
                {
                    "id": dialogue.id,
                    "summary": generate.longest_k_baseline(dialogue, n_sentences),
                    "cuts": [],
                    "mode": mode_raw,
                }
            )
            continue

        if generator_spec == "echo":
            keyphrases = (
                _keyphrases_for(sample, args, config, lambda m: _warn(args, m))
                if sample.summary is not None
                else None
            )
            gen = generate.make_echo_generator(dialogue, intents, keyphrases)
        elif generator_spec.startswith("remote:"):
            gen = generate.make_remote_generator(generator_spec[len("remote:") :])
        else:
            raise CliError(f"unknown generator {generator_spec!r}")

        try:
            result = generate.summarize(
                dialogue,
                gen,
                mode=mode,
                k=min(k, dialogue.n_turns) if k is not None else None,
                intents=intents,
                model=model,
                probs=injected.get(dialogue.id),
                threshold=threshold,
                max_tokens=max_tokens,
            )
        except (ValueError, generate.GeneratorError) as exc:
            raise CliError(f"{dialogue.id}: {exc}") from exc
        for message in result.warnings:
            _warn(args, f"{dialogue.id}: {message}")
        records.append(
            {
                "id": dialogue.id,
                "summary": result.summary,
                "cuts": list(result.segmentation.cuts),
                "mode": mode_raw,
            }
        )
    _write_jsonl(args.output, records)
    _say(args, f"summaries: {len(records)}")
    return 0


def cmd_evaluate(args, config) -> int:
    try:
        with Path(args.predictions).open(encoding="utf-8") as fin:
            predicted = {}
            for line in fin:
                if line.strip():
                    record = json.loads(line)
                    predicted[str(record["id"])] = str(record["summary"])
    except OSError as exc:
        raise CliError(f"cannot read predictions {args.predictions}: {exc}") from exc
    except (json.JSONDecodeError, KeyError) as exc:
        raise CliError(f"bad predictions file {args.predictions}: {exc}") from exc

    ref_path = args.ref or args.corpus
    ref_report = _load_samples(ref_path)
    corpus_report = (
        ref_report if ref_path == args.corpus else _load_samples(args.corpus)
    )
    dialogues = {s.dialogue.id: s.dialogue for s in corpus_report.samples}

    predictions, references, dialogue_list = [], [], []
    missing = 0
    for sample in ref_report.samples:
        did = sample.dialogue.id
        if sample.summary is None or did not in predicted or did not in dialogues:
            missing += 1
            continue
        predictions.append(predicted[did])
        references.append(sample.summary.text)
        dialogue_list.append(dialogues[did])
    if missing:
        _warn(args, f"{missing} records without prediction/reference were skipped")
    stem = _pick(args, config, "stem", True)
    try:
        report = metrics.evaluate_corpus(predictions, references, dialogue_list, stem=stem)
    except ValueError as exc:
        raise CliError(str(exc)) from exc

    print(f"records       {report.n_records}")
    print(f"rouge1        {report.rouge1:.4f}")
    print(f"rouge2        {report.rouge2:.4f}")
    print(f"rougeL        {report.rougeL:.4f}")
    print(f"length_ratio  {report.length_ratio:.4f}")
    if args.output:
        try:
            Path(args.output).write_text(
                json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
            )
        except OSError as exc:
            raise CliError(f"cannot write {args.output}: {exc}") from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchsum",
        description="Sketch-then-summarize dialogue summarization pipeline.",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress counters and warnings")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--config", default=None, help="JSON config file (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="normalize a corpus into canonical JSONL")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("sketch", help="write serialized per-sample sketches")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--trees", default=None, help="bracketed-tree JSONL sidecar")
    p.add_argument("--rules", default=None, help="intent rule config JSON")
    p.add_argument("--stopwords", default=None, help="stopword list, one per line")
    p.add_argument("--lcs-min", dest="lcs_min", type=int, default=None)
    p.add_argument("--min-content", dest="min_content", type=int, default=None)
    p.add_argument("--lcs-target", dest="lcs_target", choices=["summary", "sentence"], default=None)
    p.add_argument("--style", choices=["index", "hash"], default=None)
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("segment", help="emit alignment pseudo-labels")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sim-variant", dest="sim_variant", choices=["f1", "recall", "precision"], default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("train-cutter", help="train the cut-point classifier")
    p.add_argument("input")
    p.add_argument("labels")
    p.add_argument("model_out")
    p.add_argument("--rules", default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--l2", type=float, default=None)
    p.set_defaults(func=cmd_train_cutter)

    p = sub.add_parser("predict-cuts", help="predict cut probabilities")
    p.add_argument("input")
    p.add_argument("model")
    p.add_argument("output")
    p.add_argument("--rules", default=None)
    p.add_argument("--threshold", dest="cut_threshold", type=float, default=None)
    p.set_defaults(func=cmd_predict_cuts)

    p = sub.add_parser("emit-training", help="emit highlighted training pairs")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sketch-scope", dest="sketch_scope", choices=["segment", "full"], default=None)
    p.add_argument("--trees", default=None)
    p.add_argument("--rules", default=None)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--lcs-min", dest="lcs_min", type=int, default=None)
    p.add_argument("--min-content", dest="min_content", type=int, default=None)
    p.add_argument("--lcs-target", dest="lcs_target", choices=["summary", "sentence"], default=None)
    p.set_defaults(func=cmd_emit_training)

    p = sub.add_parser("summarize", help="run end-to-end summarization")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", default=None, help="auto | one | k=K")
    p.add_argument("--generator", default=None, help="longest | echo | remote:URL")
    p.add_argument("--model", default=None, help="cut classifier JSON file")
    p.add_argument("--probs", default=None, help="injected probabilities JSONL")
    p.add_argument("--threshold", dest="cut_threshold", type=float, default=None)
    p.add_argument("--max-tokens", dest="max_tokens", type=int, default=None)
    p.add_argument("--rules", default=None)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--lcs-min", dest="lcs_min", type=int, default=None)
    p.add_argument("--min-content", dest="min_content", type=int, default=None)
    p.add_argument("--lcs-target", dest="lcs_target", choices=["summary", "sentence"], default=None)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="score predictions against references")
    p.add_argument("predictions")
    p.add_argument("corpus")
    p.add_argument("--ref", default=None, help="reference corpus (defaults to corpus)")
    p.add_argument("--stem", dest="stem", action="store_true", default=None)
    p.add_argument("--no-stem", dest="stem", action="store_false")
    p.add_argument("--out", dest="output", default=None, help="write JSON report here")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
