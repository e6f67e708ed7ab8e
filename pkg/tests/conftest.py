"""Shared corpus generators and mock fixtures for the test suite."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from nerpipe.corpus import AnnotatedSentence, EntitySpan
from nerpipe.masking import mask_entities, render_template

WORDS = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo lima "
    "mike november oscar papa quebec romeo sierra tango uniform victor whiskey "
    "the a of to in and on was for with"
).split()

LABELS = ["PER", "LOC", "ORG", "MISC", "GENE"]


def random_spans(
    rng: random.Random,
    n_tokens: int,
    labels: list[str] = LABELS,
    no_adjacent_same_label: bool = True,
    p_span: float = 0.35,
) -> list[EntitySpan]:
    spans: list[EntitySpan] = []
    i = 0
    while i < n_tokens:
        if rng.random() < p_span:
            length = rng.randint(1, min(3, n_tokens - i))
            label = rng.choice(labels)
            if (
                no_adjacent_same_label
                and spans
                and spans[-1].end == i
                and spans[-1].label == label
            ):
                label = rng.choice([l for l in labels if l != label])
            spans.append(EntitySpan(i, i + length, label))
            i += length
        else:
            i += 1
    return spans


def random_sentence(
    rng: random.Random,
    sid: str,
    min_tokens: int = 1,
    max_tokens: int = 12,
    require_span: bool = False,
    no_adjacent_same_label: bool = True,
) -> AnnotatedSentence:
    n = rng.randint(min_tokens, max_tokens)
    tokens = [rng.choice(WORDS) for _ in range(n)]
    spans = random_spans(rng, n, no_adjacent_same_label=no_adjacent_same_label)
    while require_span and not spans:
        spans = random_spans(rng, n, no_adjacent_same_label=no_adjacent_same_label)
    return AnnotatedSentence(sid, tokens, spans, "synthetic")


def random_corpus(
    seed: int, size: int, require_span: bool = False, **kwargs
) -> list[AnnotatedSentence]:
    rng = random.Random(seed)
    return [
        random_sentence(rng, f"syn#{i}", require_span=require_span, **kwargs)
        for i in range(size)
    ]


@st.composite
def sentence_strategy(
    draw, min_tokens=1, max_tokens=10, require_span=False, no_adjacent_same_label=True
):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    return random_sentence(
        rng,
        f"hyp#{seed}",
        min_tokens=min_tokens,
        max_tokens=max_tokens,
        require_span=require_span,
        no_adjacent_same_label=no_adjacent_same_label,
    )


def identity_mock_entry(sentence: AnnotatedSentence, n_variants: int = 2) -> dict:
    """Fixture entry whose variants are the rendered template itself."""
    rendered = render_template(mask_entities(sentence))
    return {"match": sentence.id, "body": {"variants": [rendered] * n_variants}}


def dropped_placeholder_text(sentence: AnnotatedSentence) -> str:
    """Rendered template with its last placeholder removed (fails the tag gate)."""
    rendered = render_template(mask_entities(sentence))
    cut = rendered.rfind("<<")
    end = rendered.find(">>", cut) + 2
    return (rendered[:cut] + rendered[end:]).strip()
