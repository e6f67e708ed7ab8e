"""Entity masking for paraphrase prompts, and re-injection of surfaces.

A sentence's entity spans are replaced by typed ``<<LABEL>>`` placeholders
(one placeholder per span, however many words it covers). After an LLM
paraphrases the masked text, the recorded surfaces are substituted back and
fresh token-level spans are computed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import AnnotatedSentence, EntitySpan
from .errors import NothingToMaskError, PlaceholderMismatchError, UnknownLabelError

# <<LABEL>> or <<LABEL#2>>; tolerant of stray spaces inside the brackets.
PLACEHOLDER_RE = re.compile(r"<<\s*([^<>#]+?)\s*(?:#\s*(\d+)\s*)?>>")


@dataclass(frozen=True)
class Placeholder:
    ordinal: int
    label: str


@dataclass(frozen=True)
class MaskedEntity:
    ordinal: int
    label: str
    surface: str
    span: EntitySpan


@dataclass
class MaskedTemplate:
    """Sentence text split into plain-string and placeholder parts.

    Concatenating the parts with each placeholder replaced by its entity's
    surface reproduces the original sentence text exactly.
    """

    parts: list[str | Placeholder]
    entities: list[MaskedEntity]
    parent_id: str
    label_counts: dict[str, int] = field(init=False)

    def __post_init__(self):
        counts: dict[str, int] = {}
        for ent in self.entities:
            counts[ent.label] = counts.get(ent.label, 0) + 1
        self.label_counts = counts

    def to_dict(self) -> dict:
        """JSON-friendly dump for debugging."""
        return {
            "parent_id": self.parent_id,
            "parts": [
                p if isinstance(p, str) else {"ordinal": p.ordinal, "label": p.label}
                for p in self.parts
            ],
            "entities": [
                {
                    "ordinal": e.ordinal,
                    "label": e.label,
                    "surface": e.surface,
                    "span": {"start": e.span.start, "end": e.span.end},
                }
                for e in self.entities
            ],
        }


def mask_entities(sentence: AnnotatedSentence) -> MaskedTemplate:
    """Replace each entity span with one typed placeholder.

    Adjacent spans of the same label stay distinct placeholders; a
    multi-word span becomes a single placeholder whose surface is the
    space-joined token run.
    """
    if not sentence.spans:
        raise NothingToMaskError(f"{sentence.id}: nothing to mask, sentence has no spans")
    units: list[str | Placeholder] = []
    entities: list[MaskedEntity] = []
    cursor = 0
    for ordinal, span in enumerate(sentence.spans):
        units.extend(sentence.tokens[cursor : span.start])
        units.append(Placeholder(ordinal, span.label))
        surface = " ".join(sentence.tokens[span.start : span.end])
        entities.append(MaskedEntity(ordinal, span.label, surface, span))
        cursor = span.end
    units.extend(sentence.tokens[cursor:])

    # Merge consecutive tokens into plain parts, keeping the single spaces
    # that separate adjacent units so part concatenation rebuilds the text.
    parts: list[str | Placeholder] = []
    buf = ""
    for i, unit in enumerate(units):
        sep = " " if i > 0 else ""
        if isinstance(unit, Placeholder):
            if buf + sep:
                parts.append(buf + sep)
            buf = ""
            parts.append(unit)
        else:
            buf += sep + unit
    if buf:
        parts.append(buf)
    return MaskedTemplate(parts=parts, entities=entities, parent_id=sentence.id)


def _placeholder_token(template: MaskedTemplate, placeholder: Placeholder) -> str:
    if template.label_counts[placeholder.label] <= 1:
        return f"<<{placeholder.label}>>"
    nth = sum(
        1
        for e in template.entities[: placeholder.ordinal + 1]
        if e.label == placeholder.label
    )
    return f"<<{placeholder.label}#{nth}>>"


def render_template(template: MaskedTemplate) -> str:
    """Render the template with ``<<LABEL>>`` placeholder tokens.

    Labels that occur more than once get a 1-based ``#n`` suffix so that
    re-injection stays unambiguous.
    """
    return "".join(
        p if isinstance(p, str) else _placeholder_token(template, p)
        for p in template.parts
    )


def find_placeholders(text: str) -> list[tuple[str, int | None]]:
    """All ``<<...>>`` occurrences in text as (label, optional ordinal)."""
    return [
        (m.group(1), int(m.group(2)) if m.group(2) else None)
        for m in PLACEHOLDER_RE.finditer(text)
    ]


def reinject_entities(
    variant_text: str, template: MaskedTemplate, variant_index: int = 1
) -> AnnotatedSentence:
    """Substitute recorded surfaces back into a paraphrased variant.

    Placeholders carrying a ``#n`` suffix are matched to the n-th entity of
    that label; suffix-free placeholders take the entities of their label in
    left-to-right order (positional mapping). The result is whitespace
    tokenized with spans computed from the substituted surfaces, under the
    id ``<parent_id>::v<variant_index>``.
    """
    matches = list(PLACEHOLDER_RE.finditer(variant_text))
    if len(matches) != len(template.entities):
        raise PlaceholderMismatchError(len(matches), len(template.entities))

    by_label: dict[str, list[MaskedEntity]] = {}
    for ent in template.entities:
        by_label.setdefault(ent.label, []).append(ent)
    found_per_label: dict[str, int] = {}
    for m in matches:
        label = m.group(1)
        if label not in by_label:
            raise UnknownLabelError(label)
        found_per_label[label] = found_per_label.get(label, 0) + 1
    for label, expected in template.label_counts.items():
        if found_per_label.get(label, 0) != expected:
            raise PlaceholderMismatchError(
                found_per_label.get(label, 0), expected, label=label
            )

    remaining = {label: list(ents) for label, ents in by_label.items()}
    tokens: list[str] = []
    spans: list[EntitySpan] = []
    pos = 0
    for m in matches:
        label, suffix = m.group(1), m.group(2)
        target = None
        if suffix is not None:
            nth = int(suffix)
            if 1 <= nth <= len(by_label[label]):
                candidate = by_label[label][nth - 1]
                if candidate in remaining[label]:
                    target = candidate
        if target is None:
            # No suffix, or a bad/duplicate one: take label-wise, left to right.
            target = remaining[label][0]
        remaining[label].remove(target)

        tokens.extend(variant_text[pos : m.start()].split())
        start = len(tokens)
        tokens.extend(target.surface.split())
        spans.append(EntitySpan(start, len(tokens), target.label))
        pos = m.end()
    tokens.extend(variant_text[pos:].split())

    return AnnotatedSentence(
        id=f"{template.parent_id}::v{variant_index}",
        tokens=tokens,
        spans=spans,
        source=f"augmented:{template.parent_id}",
    )
