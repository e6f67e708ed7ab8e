"""Annotated NER corpus ingestion, filtering and sampling.

Sentences are whitespace-tokenized token lists with typed half-open entity
spans. CoNLL and JSONL readers normalize everything into
:class:`AnnotatedSentence`, the unit every later stage consumes.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import CorpusParseError, SchemaError

# Function words that almost never appear in non-English text; one hit plus a
# mostly-ASCII token stream is enough for the default language heuristic.
ENGLISH_STOPWORDS = frozenset(
    "the a an and or of to in on for with at by from is are was were be been "
    "this that these those it its he she they we you i as but not have has "
    "had will would can could do does did their his her our your my".split()
)


@dataclass(frozen=True)
class EntitySpan:
    """Half-open token range [start, end) carrying one entity label."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"bad span bounds [{self.start}, {self.end})")
        if not self.label or self.label == "O":
            raise ValueError(f"bad span label {self.label!r}")


@dataclass
class AnnotatedSentence:
    """One tokenized sentence with sorted, non-overlapping entity spans."""

    id: str
    tokens: list[str]
    spans: list[EntitySpan]
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValueError("sentence id must be non-empty")
        for i, tok in enumerate(self.tokens):
            if not tok or any(c.isspace() for c in tok):
                raise ValueError(f"{self.id}: token {i} is empty or has whitespace")
        prev_end = 0
        for span in self.spans:
            if span.start < prev_end:
                raise ValueError(f"{self.id}: spans overlap or are unsorted at {span}")
            if span.end > len(self.tokens):
                raise ValueError(
                    f"{self.id}: span end {span.end} > token count {len(self.tokens)}"
                )
            prev_end = span.end

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class GuidelineEntry:
    """Definition and annotation guidance for one label; both may be empty."""

    definition: str = ""
    guidelines: str = ""


@dataclass
class LabelSchema:
    """Ordered label inventory with per-label definition/guideline text."""

    name: str
    labels: dict[str, GuidelineEntry] = field(default_factory=dict)

    def __post_init__(self):
        for label in self.labels:
            if not label or label == "O":
                raise SchemaError(f"invalid schema label {label!r}")

    def __contains__(self, label: str) -> bool:
        return label in self.labels


def load_schema(path: str | Path, name: str | None = None) -> LabelSchema:
    """Load a schema file: one JSON object mapping label -> {definition, guidelines}."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected a JSON object at top level")
    labels = {}
    for label, entry in raw.items():
        if not isinstance(entry, dict):
            raise SchemaError(f"{path}: entry for {label!r} must be an object")
        labels[label] = GuidelineEntry(
            definition=str(entry.get("definition", "")),
            guidelines=str(entry.get("guidelines", "")),
        )
    return LabelSchema(name=name or path.stem, labels=labels)


def parse_conll(
    text: str,
    source: str = "conll",
    separator: str | None = None,
    token_column: int = 0,
    tag_column: int = -1,
) -> list[AnnotatedSentence]:
    """Parse token-per-line BIO text; blank lines separate sentences.

    ``separator=None`` splits on any whitespace. The tag is read from
    ``tag_column`` so 2-column and CoNLL-2003 4-column files both work.
    Ids are assigned as ``<source>#<ordinal>``.
    """
    from .tagformat import bio_to_spans  # local import, tagformat imports us

    sentences: list[AnnotatedSentence] = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush():
        if not tokens:
            return
        sid = f"{source}#{len(sentences)}"
        spans = bio_to_spans(tokens, tags)
        sentences.append(AnnotatedSentence(sid, list(tokens), spans, source))
        tokens.clear()
        tags.clear()

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        fields = line.split(separator)
        if len(fields) < 2:
            raise CorpusParseError(
                f"expected token and tag columns, got {line!r}", line=line_no
            )
        token = fields[token_column]
        if token == "-DOCSTART-":
            continue
        tokens.append(token)
        tags.append(fields[tag_column])
    flush()
    return sentences


def parse_jsonl(lines: Iterable[str] | str) -> list[AnnotatedSentence]:
    """Parse one sentence object per line; rejects anything violating invariants."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    sentences: list[AnnotatedSentence] = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"not valid JSON ({exc.msg})", line=line_no) from exc
        sid = obj.get("id")
        try:
            spans = [
                EntitySpan(int(s["start"]), int(s["end"]), str(s["label"]))
                for s in obj.get("spans", [])
            ]
            sentence = AnnotatedSentence(
                id=str(sid),
                tokens=[str(t) for t in obj.get("tokens", [])],
                spans=spans,
                source=str(obj.get("source", "")),
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise CorpusParseError(f"id {sid!r}: {exc}", line=line_no) from exc
        if sentence.id in seen_ids:
            raise CorpusParseError(f"duplicate id {sentence.id!r}", line=line_no)
        seen_ids.add(sentence.id)
        sentences.append(sentence)
    return sentences


def read_jsonl(path: str | Path) -> list[AnnotatedSentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_jsonl(fh)


def sentence_to_json(sentence: AnnotatedSentence) -> str:
    # Fixed key order keeps emitted files byte-stable.
    obj = {
        "id": sentence.id,
        "tokens": sentence.tokens,
        "spans": [
            {"start": s.start, "end": s.end, "label": s.label} for s in sentence.spans
        ],
        "source": sentence.source,
    }
    return json.dumps(obj, ensure_ascii=False)


def write_jsonl(sentences: Iterable[AnnotatedSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sentence in sentences:
            fh.write(sentence_to_json(sentence) + "\n")


def is_probably_english(sentence: AnnotatedSentence) -> bool:
    """Cheap deterministic language check.

    A token counts as English-compatible when every alphabetic character in
    it is ASCII (punctuation and digits never count against). Requires 90%
    such tokens plus at least one common English function word.
    """
    if not sentence.tokens:
        return False
    ascii_like = 0
    has_stopword = False
    for tok in sentence.tokens:
        alpha = [c for c in tok if c.isalpha()]
        if all(c.isascii() for c in alpha):
            ascii_like += 1
        if tok.lower() in ENGLISH_STOPWORDS:
            has_stopword = True
    return has_stopword and ascii_like / len(sentence.tokens) >= 0.9


def filter_corpus(
    sentences: Iterable[AnnotatedSentence],
    min_words: int = 10,
    english_only: bool = True,
    label_allowlist: set[str] | None = None,
    drop_unannotated: bool = False,
    english_detector: Callable[[AnnotatedSentence], bool] = is_probably_english,
) -> tuple[list[AnnotatedSentence], list[tuple[AnnotatedSentence, str]]]:
    """Apply length, language and label-allowlist rules.

    Returns (kept, rejected) where each rejected entry names the first rule
    that fired: min_words, non_english, allowlist or unannotated. When an
    allowlist is given, kept sentences retain only allowlisted spans and a
    sentence that loses all of its spans to the allowlist is dropped.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    kept: list[AnnotatedSentence] = []
    rejected: list[tuple[AnnotatedSentence, str]] = []
    for sentence in sentences:
        if len(sentence.tokens) < min_words:
            rejected.append((sentence, "min_words"))
            continue
        if english_only and not english_detector(sentence):
            rejected.append((sentence, "non_english"))
            continue
        if label_allowlist is not None:
            spans = [s for s in sentence.spans if s.label in label_allowlist]
            if sentence.spans and not spans:
                rejected.append((sentence, "allowlist"))
                continue
            if len(spans) != len(sentence.spans):
                sentence = AnnotatedSentence(
                    sentence.id, sentence.tokens, spans, sentence.source
                )
        if drop_unannotated and not sentence.spans:
            rejected.append((sentence, "unannotated"))
            continue
        kept.append(sentence)
    return kept, rejected


def sample_corpus(
    sentences: list[AnnotatedSentence], n: int, seed: int
) -> list[AnnotatedSentence]:
    """Uniform sample without replacement, preserving original relative order."""
    if n > len(sentences):
        raise ValueError(f"cannot sample {n} from {len(sentences)} sentences")
    picked = random.Random(seed).sample(range(len(sentences)), n)
    return [sentences[i] for i in sorted(picked)]
