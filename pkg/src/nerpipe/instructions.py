"""Instruction-tuning record construction with token-budget chunking.

Every training record pairs the full task instruction (tag inventory plus
optional per-label definition/guideline block) with a sentence's words and
its word/slash target. Records that would blow the context budget are split
into contiguous token windows that never cut through an entity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .corpus import AnnotatedSentence, EntitySpan, LabelSchema
from .errors import BudgetError, SchemaError

INSTRUCTION_HEADER = """Task Description:
Please analyze the sentence provided, identifying the type of entity for each word on a token-by-token basis. Each word in the sentence should be annotated with its corresponding named entity tag, using a forward slash / between the word and the tag. Output format is: word_1/label_1, word_2/label_2, ...

Guideline:
1. Use O for words that are not part of any named entity.
2. For multi-word entities, label each word with the same entity tag.

Use the specific entity tags: {tag_list}, and O."""

GUIDELINES_INTRO = (
    "To help you, here are dedicated DEFINITION and GUIDELINES for each entity tag."
)


def default_token_count(text: str) -> int:
    # Heuristic stand-in for a real tokenizer: one token per 4 UTF-8 bytes.
    return (len(text.encode("utf-8")) + 3) // 4


def count_tokens(text: str, counter: Callable[[str], int] | None = None) -> int:
    return (counter or default_token_count)(text)


@dataclass
class TokenBudget:
    max_tokens: int = 2048
    counter: Callable[[str], int] | None = None

    def __post_init__(self):
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be > 0")

    def count(self, text: str) -> int:
        return count_tokens(text, self.counter)


@dataclass
class InstructionExample:
    instruction: str
    input: str
    output: str
    parent_id: str
    chunk_index: int = 0


def build_instruction(schema: LabelSchema, include_guidelines: bool = True) -> str:
    """Render the task instruction for a schema, byte-stable for fixed inputs."""
    if not schema.labels:
        raise SchemaError("schema has no labels")
    text = INSTRUCTION_HEADER.format(tag_list=", ".join(schema.labels))
    if include_guidelines:
        block = {
            label: {"DEFINITION": entry.definition, "GUIDELINES": entry.guidelines}
            for label, entry in schema.labels.items()
        }
        text += "\n" + GUIDELINES_INTRO + "\n"
        text += json.dumps(block, ensure_ascii=False, indent=2)
    return text


def example_token_count(example: InstructionExample, budget: TokenBudget) -> int:
    """Budget cost of one record: instruction + input + output counts summed."""
    return (
        budget.count(example.instruction)
        + budget.count(example.input)
        + budget.count(example.output)
    )


def _token_labels(sentence: AnnotatedSentence) -> list[str]:
    labels = ["O"] * len(sentence.tokens)
    for span in sentence.spans:
        for i in range(span.start, span.end):
            labels[i] = span.label
    return labels


def build_example(
    sentence: AnnotatedSentence,
    schema: LabelSchema,
    include_guidelines: bool = True,
    budget: TokenBudget | None = None,
) -> list[InstructionExample]:
    """Build the training record(s) for one sentence.

    Returns a single example when everything fits the budget. Otherwise the
    sentence is split into contiguous windows whose inputs concatenate back
    to the original token sequence; a window boundary that would cut an
    entity is moved in front of it. Each chunk repeats the full instruction
    so records stay self-contained.
    """
    if not sentence.tokens:
        raise ValueError(f"{sentence.id}: empty sentence")
    for span in sentence.spans:
        if span.label not in schema:
            raise SchemaError(
                f"{sentence.id}: label {span.label!r} not in schema {schema.name!r}"
            )
    budget = budget or TokenBudget()
    instruction = build_instruction(schema, include_guidelines)
    inst_tokens = budget.count(instruction)
    tokens = sentence.tokens
    labels = _token_labels(sentence)
    items = [f"{tok}/{lab}" for tok, lab in zip(tokens, labels)]
    n = len(tokens)

    def window_cost(start: int, end: int) -> int:
        return (
            inst_tokens
            + budget.count(" ".join(tokens[start:end]))
            + budget.count(", ".join(items[start:end]))
        )

    def make_example(start: int, end: int, chunk_index: int) -> InstructionExample:
        return InstructionExample(
            instruction=instruction,
            input=" ".join(tokens[start:end]),
            output=", ".join(items[start:end]),
            parent_id=sentence.id,
            chunk_index=chunk_index,
        )

    if window_cost(0, n) <= budget.max_tokens:
        return [make_example(0, n, 0)]

    span_at: list[EntitySpan | None] = [None] * n
    for span in sentence.spans:
        for i in range(span.start, span.end):
            span_at[i] = span

    examples: list[InstructionExample] = []
    start = 0
    while start < n:
        if window_cost(start, start + 1) > budget.max_tokens:
            raise BudgetError(
                f"{sentence.id}: token {tokens[start]!r} plus instruction "
                f"({inst_tokens} tokens) exceeds budget {budget.max_tokens}"
            )
        # Largest end that still fits; cost is monotone in the window size.
        lo, hi, end = start + 1, n, start + 1
        while lo <= hi:
            mid = (lo + hi) // 2
            if window_cost(start, mid) <= budget.max_tokens:
                end, lo = mid, mid + 1
            else:
                hi = mid - 1
        if end < n:
            straddled = span_at[end]
            if straddled is not None and straddled.start < end:
                end = straddled.start
        if end <= start:
            raise BudgetError(
                f"{sentence.id}: entity at token {start} does not fit the budget "
                f"of {budget.max_tokens} tokens"
            )
        examples.append(make_example(start, end, len(examples)))
        start = end
    return examples


def emit_training_jsonl(
    examples: Iterable[InstructionExample], path: str | Path
) -> None:
    """One record per line with fixed key order, UTF-8, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            obj = {
                "instruction": ex.instruction,
                "input": ex.input,
                "output": ex.output,
                "meta": {"parent_id": ex.parent_id, "chunk": ex.chunk_index},
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_training_jsonl(path: str | Path) -> list[InstructionExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            meta = obj.get("meta", {})
            examples.append(
                InstructionExample(
                    instruction=obj["instruction"],
                    input=obj["input"],
                    output=obj["output"],
                    parent_id=meta.get("parent_id", ""),
                    chunk_index=meta.get("chunk", 0),
                )
            )
    return examples


def assemble_dataset(
    base: list[AnnotatedSentence],
    gold: list[AnnotatedSentence],
    augmented: list[AnnotatedSentence],
    duplication_factor: int = 0,
) -> tuple[list[AnnotatedSentence], dict]:
    """Concatenate base + gold + augmented (+ gold duplicates) in stable order.

    Each duplication round appends every gold sentence again under the id
    suffix ``::dup<k>``. The manifest records per-source counts.
    """
    if duplication_factor < 0:
        raise ValueError("duplication_factor must be >= 0")
    dataset = list(base) + list(gold) + list(augmented)
    for k in range(1, duplication_factor + 1):
        for g in gold:
            dataset.append(
                AnnotatedSentence(f"{g.id}::dup{k}", g.tokens, g.spans, g.source)
            )
    manifest = {
        "base": len(base),
        "gold": len(gold),
        "augmented": len(augmented),
        "duplicated": len(gold) * duplication_factor,
        "total": len(dataset),
    }
    return dataset, manifest
