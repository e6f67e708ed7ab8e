"""Pipeline stages as composable subcommands.

Every stage reads and writes machine-readable files (JSONL/JSON) so runs
can be cached on disk and re-run independently; human summaries go to
stdout. Exit codes: 0 success, 1 operational failure, 2 usage or config
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import corpus as corpus_io
from .config import ConfigError, load_config
from .corpus import filter_corpus, load_schema, sample_corpus, write_jsonl
from .errors import NerPipeError
from .evaluation import EvalReport, LabelScore, evaluate_generations, render_report
from .instructions import (
    TokenBudget,
    assemble_dataset,
    build_example,
    emit_training_jsonl,
)
from .llm import MockChatClient, OpenAIChatClient, RemoteEmbedder
from .paraphrase import augment_corpus
from .validation import TfEmbedder


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {p}")
    return p


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_corpus(path: Path, fmt: str, source: str) -> list:
    if fmt == "auto":
        fmt = "jsonl" if path.suffix == ".jsonl" else "conll"
    if fmt == "jsonl":
        return corpus_io.read_jsonl(path)
    return corpus_io.parse_conll(path.read_text(encoding="utf-8"), source=source)


def cmd_filter(args) -> int:
    cfg = load_config(args.config)
    path = _require_file(args.input, "input corpus")
    sentences = _read_corpus(path, args.input_format, args.source or path.stem)
    allowlist = set(args.allowlist.split(",")) if args.allowlist else (
        set(cfg.filter.label_allowlist) if cfg.filter.label_allowlist else None
    )
    kept, rejected = filter_corpus(
        sentences,
        min_words=args.min_words if args.min_words is not None else cfg.filter.min_words,
        english_only=not args.no_english_filter and cfg.filter.english_only,
        label_allowlist=allowlist,
        drop_unannotated=args.drop_unannotated or cfg.filter.drop_unannotated,
    )
    seed = args.seed if args.seed is not None else cfg.seed
    filtered = len(kept)
    if args.sample is not None:
        if args.sample > len(kept):
            print(
                f"cannot sample {args.sample} from {len(kept)} kept sentences",
                file=sys.stderr,
            )
            return 1
        kept = sample_corpus(kept, args.sample, seed)
    out = _out_dir(args)
    write_jsonl(kept, out / "kept.jsonl")
    with open(out / "rejected.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for sentence, reason in rejected:
            fh.write(json.dumps({"id": sentence.id, "reason": reason}) + "\n")
    reasons: dict[str, int] = {}
    for _, reason in rejected:
        reasons[reason] = reasons.get(reason, 0) + 1
    summary = {
        "input": len(sentences),
        "filtered": filtered,
        "kept": len(kept),
        "rejected": len(rejected),
        "reasons": dict(sorted(reasons.items())),
    }
    _write_json(summary, out / "filter_summary.json")
    print(f"kept {len(kept)} / {len(sentences)} sentences -> {out / 'kept.jsonl'}")
    for reason, count in sorted(reasons.items()):
        print(f"  rejected {count} ({reason})")
    return 0


def cmd_augment(args) -> int:
    cfg = load_config(args.config)
    path = _require_file(args.input, "gold corpus")
    overrides = {}
    if args.variants is not None:
        overrides["n_variants"] = args.variants
    if args.parallel is not None:
        overrides["max_parallel_requests"] = args.parallel
    try:
        # replace() re-runs config validation on the overridden values
        para = dataclasses.replace(cfg.paraphrase, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.mock:
        client = MockChatClient.from_jsonl(_require_file(args.mock, "mock fixture"))
    elif cfg.llm.base_url and cfg.llm.model:
        client = OpenAIChatClient(
            cfg.llm.base_url, cfg.llm.model, cfg.llm.api_key_env, para.request_timeout
        )
    else:
        raise ConfigError("no LLM endpoint configured and no --mock fixture given")
    if cfg.embedder.kind == "remote":
        embedder = RemoteEmbedder(
            cfg.embedder.base_url,
            cfg.embedder.model,
            cfg.embedder.api_key_env,
            cfg.embedder.timeout,
        )
    else:
        embedder = TfEmbedder()
    gold = corpus_io.read_jsonl(path)
    records, summary = augment_corpus(gold, para, client, embedder)
    out = _out_dir(args)
    variants = [v for r in records for v in r.variants]
    write_jsonl(variants, out / "variants.jsonl")
    _write_json(summary, out / "augment_summary.json")
    print(
        f"kept {summary['kept_variants']} variants from {summary['inputs']} sentences "
        f"(failure rate {summary['failure_rate']:.3f}) -> {out / 'variants.jsonl'}"
    )
    return 0


def cmd_build_dataset(args) -> int:
    cfg = load_config(args.config)
    schema = load_schema(_require_file(args.schema, "schema file"))

    def read_opt(path: str | None) -> list:
        return corpus_io.read_jsonl(_require_file(path, "corpus file")) if path else []

    base = read_opt(args.base)
    gold = read_opt(args.gold)
    augmented = read_opt(args.augmented)
    dataset, manifest = assemble_dataset(base, gold, augmented, args.duplicate)
    budget = TokenBudget(max_tokens=args.max_tokens or cfg.max_tokens)
    examples = []
    for sentence in dataset:
        examples.extend(
            build_example(
                sentence, schema, include_guidelines=not args.no_guidelines, budget=budget
            )
        )
    manifest["examples"] = len(examples)
    manifest["max_tokens"] = budget.max_tokens
    manifest["guidelines"] = not args.no_guidelines
    out = _out_dir(args)
    emit_training_jsonl(examples, out / "train.jsonl")
    _write_json(manifest, out / "manifest.json")
    print(
        f"wrote {len(examples)} training records from {manifest['total']} sentences "
        f"-> {out / 'train.jsonl'}"
    )
    return 0


def cmd_evaluate(args) -> int:
    gold = corpus_io.read_jsonl(_require_file(args.gold, "gold corpus"))
    generations: dict[str, str] = {}
    with open(_require_file(args.generations, "generations file"), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                generations[obj["id"]] = obj["output"]
    report = evaluate_generations(gold, generations, fmt=args.format)
    out = _out_dir(args)
    text = render_report(report, "text")
    (out / "report.txt").write_text(text + "\n", encoding="utf-8")
    (out / "report.json").write_text(render_report(report, "json") + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_report(args) -> int:
    raw = json.loads(_require_file(args.report, "report file").read_text(encoding="utf-8"))
    report = EvalReport(
        per_label={k: LabelScore(**v) for k, v in raw.get("per_label", {}).items()},
        micro=LabelScore(**raw["micro"]),
        n_sentences=raw.get("n_sentences", 0),
        irregular_outputs=raw.get("irregular_outputs", 0),
    )
    print(render_report(report, "text"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nerpipe",
        description="Low-resource NER data pipeline: filter, augment, build, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("filter", help="filter and sample an annotated corpus")
    p.add_argument("--input", required=True, help="corpus file (JSONL or CoNLL)")
    p.add_argument("--input-format", choices=["auto", "jsonl", "conll"], default="auto")
    p.add_argument("--source", default=None, help="source tag for CoNLL ids")
    p.add_argument("--output", default=".", help="output directory")
    p.add_argument("--config", default=None)
    p.add_argument("--min-words", type=int, default=None)
    p.add_argument("--no-english-filter", action="store_true")
    p.add_argument("--allowlist", default=None, help="comma-separated label allowlist")
    p.add_argument("--drop-unannotated", action="store_true")
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("augment", help="generate paraphrase variants via LLM or mock")
    p.add_argument("--input", required=True, help="gold corpus JSONL")
    p.add_argument("--output", default=".")
    p.add_argument("--config", default=None)
    p.add_argument("--mock", default=None, help="scripted response fixture JSONL")
    p.add_argument("--variants", type=int, default=None)
    p.add_argument("--parallel", type=int, default=None)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("build-dataset", help="emit instruction-tuning JSONL")
    p.add_argument("--schema", required=True, help="label schema JSON")
    p.add_argument("--base", default=None, help="general-domain corpus JSONL")
    p.add_argument("--gold", default=None, help="in-domain gold JSONL")
    p.add_argument("--augmented", default=None, help="augmented variants JSONL")
    p.add_argument("--duplicate", type=int, default=0, help="gold duplication factor")
    p.add_argument("--no-guidelines", action="store_true")
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--output", default=".")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("evaluate", help="score generations with entity-level F1")
    p.add_argument("--gold", required=True, help="gold corpus JSONL")
    p.add_argument("--generations", required=True, help="JSONL of {id, output}")
    p.add_argument("--format", choices=["flat", "bio"], default="flat")
    p.add_argument("--output", default=".")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render a saved report.json as text")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NerPipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())
