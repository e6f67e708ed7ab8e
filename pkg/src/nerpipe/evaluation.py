"""Entity-level scoring of model generations against gold annotations.

A predicted entity counts only when its label, start and end all match a
gold span exactly; partial boundaries are plain errors. Predictions arrive
as raw generation strings, get parsed and aligned onto the gold tokens, and
are scored as (label, start, end) triple sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .corpus import AnnotatedSentence, EntitySpan
from .tagformat import (
    align_predictions,
    bio_to_spans,
    flat_tags_to_spans,
    parse_bio_lines,
    slash_to_tags,
)

FORMAT_FLAT = "flat"
FORMAT_BIO = "bio"


@dataclass
class LabelScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision/recall/F1 with the all-zero convention for empty denominators."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _score(tp: int, fp: int, fn: int) -> LabelScore:
    precision, recall, f1 = prf(tp, fp, fn)
    return LabelScore(tp, fp, fn, precision, recall, f1)


@dataclass
class EvalReport:
    per_label: dict[str, LabelScore]
    micro: LabelScore
    n_sentences: int
    irregular_outputs: int


def score_sentence(
    gold: AnnotatedSentence, predicted_spans: list[EntitySpan]
) -> dict[str, tuple[int, int, int]]:
    """Per-label (tp, fp, fn) counts for one sentence.

    Exact triple matching; duplicate predictions are deduplicated before
    scoring.
    """
    gold_set = {(s.label, s.start, s.end) for s in gold.spans}
    pred_set = {(s.label, s.start, s.end) for s in predicted_spans}
    counts: dict[str, tuple[int, int, int]] = {}
    for label in {t[0] for t in gold_set | pred_set}:
        g = {t for t in gold_set if t[0] == label}
        p = {t for t in pred_set if t[0] == label}
        counts[label] = (len(g & p), len(p - g), len(g - p))
    return counts


def _normalize_bio(tags: list[str]) -> tuple[list[str], int]:
    fixed = []
    irregular = 0
    for tag in tags:
        if tag == "O" or (tag[:2] in ("B-", "I-") and len(tag) > 2):
            fixed.append(tag)
        else:
            fixed.append("O")
            irregular += 1
    return fixed, irregular


def evaluate_generations(
    gold: list[AnnotatedSentence],
    generations: dict[str, str],
    fmt: str = FORMAT_FLAT,
) -> EvalReport:
    """Score raw generation strings keyed by gold sentence id.

    Each generation is parsed (word/slash items or token-per-line BIO),
    aligned onto the gold tokens, converted to spans and scored. A missing
    generation counts every gold span as a miss; a generation for an unknown
    id is an error. Malformed items never raise, they are tallied in
    irregular_outputs.
    """
    if fmt not in (FORMAT_FLAT, FORMAT_BIO):
        raise ValueError(f"unknown format {fmt!r}")
    gold_ids = {s.id for s in gold}
    unknown = set(generations) - gold_ids
    if unknown:
        raise ValueError(f"generations reference unknown ids: {sorted(unknown)[:5]}")

    totals: dict[str, list[int]] = {}
    irregular = 0
    for sentence in gold:
        text = generations.get(sentence.id)
        if text is None:
            predicted: list[EntitySpan] = []
        else:
            if fmt == FORMAT_FLAT:
                pairs, bad = slash_to_tags(text)
            else:
                pairs, bad = parse_bio_lines(text)
            irregular += bad
            aligned = align_predictions(sentence.tokens, pairs)
            if fmt == FORMAT_FLAT:
                predicted = flat_tags_to_spans(sentence.tokens, aligned)
            else:
                aligned, bad_shapes = _normalize_bio(aligned)
                irregular += bad_shapes
                predicted = bio_to_spans(sentence.tokens, aligned)
        for label, (tp, fp, fn) in score_sentence(sentence, predicted).items():
            bucket = totals.setdefault(label, [0, 0, 0])
            bucket[0] += tp
            bucket[1] += fp
            bucket[2] += fn

    per_label = {
        label: _score(*totals[label]) for label in sorted(totals)
    }
    micro = _score(
        sum(v[0] for v in totals.values()),
        sum(v[1] for v in totals.values()),
        sum(v[2] for v in totals.values()),
    )
    return EvalReport(per_label, micro, len(gold), irregular)


def render_report(report: EvalReport, fmt: str = "text") -> str:
    """Deterministic text table or JSON rendering; percentages use 1 decimal."""
    if fmt == "json":
        def block(s: LabelScore) -> dict:
            return {
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "precision": round(s.precision, 6),
                "recall": round(s.recall, 6),
                "f1": round(s.f1, 6),
            }

        return json.dumps(
            {
                "n_sentences": report.n_sentences,
                "irregular_outputs": report.irregular_outputs,
                "micro": block(report.micro),
                "per_label": {k: block(v) for k, v in sorted(report.per_label.items())},
            },
            ensure_ascii=False,
            indent=2,
        )
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    width = max([len("label"), len("micro")] + [len(k) for k in report.per_label])
    header = f"{'label':<{width}}  {'tp':>6} {'fp':>6} {'fn':>6} {'P':>6} {'R':>6} {'F1':>6}"
    lines = [header, "-" * len(header)]

    def row(name: str, s: LabelScore) -> str:
        return (
            f"{name:<{width}}  {s.tp:>6} {s.fp:>6} {s.fn:>6} "
            f"{100 * s.precision:>6.1f} {100 * s.recall:>6.1f} {100 * s.f1:>6.1f}"
        )

    for label in sorted(report.per_label):
        lines.append(row(label, report.per_label[label]))
    lines.append(row("micro", report.micro))
    lines.append(
        f"sentences: {report.n_sentences}  irregular outputs: {report.irregular_outputs}"
    )
    return "\n".join(lines)
