"""Paraphrase augmentation: prompt building, response parsing, retry loop.

Each sentence is masked, sent to a chat model that must leave ``<<...>>``
placeholders untouched, and every returned variant passes the validation
gates before its entities are re-injected. Failed variants trigger shortfall
regeneration at the next temperature in the schedule until the retry budget
runs out.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .corpus import AnnotatedSentence
from .errors import (
    PlaceholderMismatchError,
    ResponseParseError,
    TransportError,
    UnknownLabelError,
    VariantCountError,
)
from .llm import ChatClient, LlmRequest
from .masking import mask_entities, reinject_entities, render_template
from .validation import (
    VERDICT_FALLBACK,
    VERDICT_RETRY,
    Embedder,
    TfEmbedder,
    validate_variant,
)

OUTCOME_SUCCESS = "success"
OUTCOME_PARTIAL = "partial"
OUTCOME_FAILED = "failed"
OUTCOME_SKIPPED = "skipped"

PARAPHRASE_PROMPT = """Task Description:
You are a helpful assistant. I have a sentence with certain entities that I want to preserve in spirit, but you may modify the sentence slightly to add variety. Your task is:
1. Read the Original Sentence provided.
2. Create {n_variants} new sentences (variants) that:
   - DO NOT MODIFY any word enclosed in <<>> tags or move them around (do not introduce any new <<>> tags that weren't in the original).
   - May adjust phrasing, structure, or add contextual details while maintaining logical coherence and meaning.
   - Minor modifications are allowed, but retain the core entity references and do not transform them into something else.
3. Return the output in a valid JSON format with the generated variants.

Original Sentence: {template}"""

_CODE_FENCE_RE = re.compile(r"^```[\w-]*\s*|\s*```$")


@dataclass
class ParaphraseConfig:
    n_variants: int = 2
    max_retries: int = 2
    temperature_schedule: list[float] = field(default_factory=lambda: [0.7, 1.0, 1.2])
    similarity_threshold: float = 0.80
    request_timeout: float = 60.0
    max_parallel_requests: int = 4
    fallback_on_low_similarity: bool = True
    full_regeneration: bool = False

    def __post_init__(self):
        if self.n_variants < 1:
            raise ValueError("n_variants must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if len(self.temperature_schedule) < self.max_retries + 1:
            raise ValueError("temperature_schedule must cover every attempt")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in [0, 1]")
        if self.max_parallel_requests < 1:
            raise ValueError("max_parallel_requests must be >= 1")


@dataclass
class AugmentationRecord:
    parent_id: str
    variants: list[AnnotatedSentence]
    attempts: int
    outcome: str
    reason: str | None = None
    # Similarity score for each kept variant, in variant order.
    scores: list[float] = field(default_factory=list)
    fallbacks: int = 0
    first_attempt_requested: int = 0
    first_attempt_failures: int = 0


def build_paraphrase_prompt(template_text: str, n_variants: int) -> str:
    """Fill the paraphrasing prompt with the variant count and masked sentence."""
    if not template_text:
        raise ValueError("template_text must be non-empty")
    return PARAPHRASE_PROMPT.format(n_variants=n_variants, template=template_text)


def strip_code_fences(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        text = _CODE_FENCE_RE.sub("", text).strip()
    return text


def parse_variants(response_text: str, expected: int) -> list[str]:
    """Extract the variants array from an untrusted model response.

    Accepts ``{"variants": [...]}`` or a bare JSON array, with or without a
    surrounding code fence. Raises :class:`ResponseParseError` for anything
    that is not that shape and :class:`VariantCountError` on a wrong count.
    """
    text = strip_code_fences(response_text)
    try:
        data = json.loads(text)
    except (ValueError, RecursionError) as exc:
        raise ResponseParseError(f"response is not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        variants = data.get("variants")
        if not isinstance(variants, list):
            raise ResponseParseError("response object has no 'variants' array")
    elif isinstance(data, list):
        variants = data
    else:
        raise ResponseParseError(f"expected object or array, got {type(data).__name__}")
    if not all(isinstance(v, str) for v in variants):
        raise ResponseParseError("variants must all be strings")
    if len(variants) != expected:
        raise VariantCountError(len(variants), expected)
    return list(variants)


def augment_sentence(
    sentence: AnnotatedSentence,
    config: ParaphraseConfig,
    client: ChatClient,
    embedder: Embedder | None = None,
) -> AugmentationRecord:
    """Run the full mask -> generate -> validate -> re-inject loop for one sentence.

    Sentences without entities are passed through untouched (they still serve
    as negative instances downstream) and marked skipped.
    """
    if not sentence.spans:
        return AugmentationRecord(
            sentence.id, [], 0, OUTCOME_SKIPPED, reason="no entities"
        )
    embedder = embedder or TfEmbedder()
    template = mask_entities(sentence)
    masked_text = render_template(template)

    kept: list[AnnotatedSentence] = []
    scores: list[float] = []
    fallbacks = 0
    attempts = 0
    first_attempt_failures = 0
    any_response = False

    for attempt_idx in range(config.max_retries + 1):
        if len(kept) >= config.n_variants:
            break
        if config.full_regeneration and attempt_idx > 0:
            kept.clear()
            scores.clear()
            fallbacks = 0
        need = config.n_variants - len(kept)
        attempts += 1
        request = LlmRequest(
            model="",
            user=build_paraphrase_prompt(masked_text, need),
            temperature=config.temperature_schedule[attempt_idx],
            json_response=True,
            ref=sentence.id,
        )
        try:
            response = client.complete(request)
        except TransportError:
            if attempt_idx == 0:
                first_attempt_failures = need
            continue
        any_response = True
        try:
            variant_texts = parse_variants(response.text, need)
        except (ResponseParseError, VariantCountError):
            if attempt_idx == 0:
                first_attempt_failures = need
            continue

        round_failures = 0
        for text in variant_texts:
            try:
                outcome = validate_variant(
                    template,
                    text,
                    similarity_threshold=config.similarity_threshold,
                    embedder=embedder,
                    fallback_on_low_similarity=config.fallback_on_low_similarity,
                    original_text=masked_text,
                )
            except TransportError:
                # Remote embedder hiccup; the variant is retryable.
                round_failures += 1
                continue
            if outcome.verdict == VERDICT_RETRY:
                round_failures += 1
                continue
            try:
                variant = reinject_entities(text, template, variant_index=len(kept) + 1)
            except (PlaceholderMismatchError, UnknownLabelError):
                # Total count passed the gate but per-label assignment failed.
                round_failures += 1
                continue
            kept.append(variant)
            scores.append(outcome.similarity)
            if outcome.verdict == VERDICT_FALLBACK:
                fallbacks += 1
        if attempt_idx == 0:
            first_attempt_failures = round_failures

    if len(kept) >= config.n_variants:
        outcome_kind, reason = OUTCOME_SUCCESS, None
    elif kept:
        outcome_kind, reason = OUTCOME_PARTIAL, "validation"
    else:
        outcome_kind = OUTCOME_FAILED
        reason = "validation" if any_response else "transport"
    return AugmentationRecord(
        parent_id=sentence.id,
        variants=kept,
        attempts=attempts,
        outcome=outcome_kind,
        reason=reason,
        scores=scores,
        fallbacks=fallbacks,
        first_attempt_requested=config.n_variants,
        first_attempt_failures=first_attempt_failures,
    )


def summarize_records(records: list[AugmentationRecord]) -> dict:
    """Aggregate corpus-level augmentation accounting."""
    augmentable = [r for r in records if r.outcome != OUTCOME_SKIPPED]
    requested = sum(r.first_attempt_requested for r in augmentable)
    kept = sum(len(r.variants) for r in records)
    first_failures = sum(r.first_attempt_failures for r in augmentable)
    return {
        "inputs": len(records),
        "augmentable": len(augmentable),
        "skipped": len(records) - len(augmentable),
        "requested_variants": requested,
        "kept_variants": kept,
        "success": sum(1 for r in records if r.outcome == OUTCOME_SUCCESS),
        "partial": sum(1 for r in records if r.outcome == OUTCOME_PARTIAL),
        "failed": sum(1 for r in records if r.outcome == OUTCOME_FAILED),
        "regenerations": sum(r.attempts for r in augmentable) - len(augmentable),
        "fallback_variants": sum(r.fallbacks for r in records),
        "first_attempt_failure_rate": first_failures / requested if requested else 0.0,
        "failure_rate": (requested - kept) / requested if requested else 0.0,
    }


def augment_corpus(
    sentences: Iterable[AnnotatedSentence],
    config: ParaphraseConfig,
    client: ChatClient,
    embedder: Embedder | None = None,
) -> tuple[list[AugmentationRecord], dict]:
    """Augment a corpus with bounded request parallelism.

    Results always come back in input order, whatever order the underlying
    requests complete in; per-sentence failures are recorded, never raised.
    """
    embedder = embedder or TfEmbedder()
    sentences = list(sentences)

    def work(sentence: AnnotatedSentence) -> AugmentationRecord:
        return augment_sentence(sentence, config, client, embedder)

    if config.max_parallel_requests == 1 or len(sentences) <= 1:
        records = [work(s) for s in sentences]
    else:
        with ThreadPoolExecutor(max_workers=config.max_parallel_requests) as pool:
            records = list(pool.map(work, sentences))
    return records, summarize_records(records)
