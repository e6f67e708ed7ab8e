"""Quality gates for paraphrase candidates.

Two checks decide a variant's fate: the placeholder count must match the
template (hard gate) and the masked texts must be semantically close enough
under an embedder (soft gate, configurable fallback). Similarity is computed
on the masked forms, entities are guaranteed identical after re-injection so
including them would only inflate the score.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Protocol, Sequence

from .masking import PLACEHOLDER_RE, MaskedTemplate, find_placeholders, render_template

VERDICT_ACCEPT = "accept"
VERDICT_RETRY = "retry"
VERDICT_FALLBACK = "fallback"


class Embedder(Protocol):
    def embed(self, texts: list[str]) -> list[Sequence[float] | Counter]:
        ...


class TfEmbedder:
    """Offline term-frequency embedder: lowercased tokens, placeholders excluded.

    Keeps the whole pipeline testable without network access.
    """

    def embed(self, texts: list[str]) -> list[Counter]:
        return [
            Counter(PLACEHOLDER_RE.sub(" ", text).lower().split()) for text in texts
        ]


def cosine(u, v) -> float:
    """Cosine similarity for sparse Counters or dense vectors, clamped to [0, 1].

    Two zero vectors count as identical (1.0); one zero vector is orthogonal
    to everything (0.0). Equal vectors short-circuit to exactly 1.0.
    """
    if u == v:
        return 1.0
    if isinstance(u, dict) and isinstance(v, dict):
        dot = sum(weight * v.get(term, 0.0) for term, weight in u.items())
        nu = math.sqrt(sum(w * w for w in u.values()))
        nv = math.sqrt(sum(w * w for w in v.values()))
    else:
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 and nv == 0.0:
        return 1.0
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (nu * nv)))


def semantic_similarity(original: str, variant: str, embedder: Embedder) -> float:
    """Cosine similarity of the embedder's vectors for the two texts."""
    vec_original, vec_variant = embedder.embed([original, variant])
    return cosine(vec_original, vec_variant)


@dataclass
class ValidationOutcome:
    tag_count_ok: bool
    found_tags: int
    similarity: float
    similarity_ok: bool
    verdict: str


def check_tag_count(template: MaskedTemplate, variant_text: str) -> tuple[bool, int]:
    """Count ``<<...>>`` placeholders in the variant against the template.

    Passes only when the count matches the template's entity count and every
    found label exists in the template (no invented tags).
    """
    found = find_placeholders(variant_text)
    labels_ok = all(label in template.label_counts for label, _ in found)
    return (len(found) == len(template.entities) and labels_ok, len(found))


def validate_variant(
    template: MaskedTemplate,
    variant_text: str,
    similarity_threshold: float = 0.80,
    embedder: Embedder | None = None,
    fallback_on_low_similarity: bool = True,
    original_text: str | None = None,
) -> ValidationOutcome:
    """Run both gates on a candidate variant.

    Accept requires both gates to pass. A tag-count failure always asks for
    regeneration (retry). A similarity-only failure yields the fallback
    verdict when enabled (keep the variant, positional mapping still applies
    at re-injection), otherwise retry. Similarity is only computed once the
    tag gate has passed.
    """
    embedder = embedder or TfEmbedder()
    tag_ok, found = check_tag_count(template, variant_text)
    if not tag_ok:
        return ValidationOutcome(False, found, 0.0, False, VERDICT_RETRY)
    reference = original_text if original_text is not None else render_template(template)
    similarity = semantic_similarity(reference, variant_text, embedder)
    if similarity >= similarity_threshold:
        return ValidationOutcome(True, found, similarity, True, VERDICT_ACCEPT)
    verdict = VERDICT_FALLBACK if fallback_on_low_similarity else VERDICT_RETRY
    return ValidationOutcome(True, found, similarity, False, verdict)
