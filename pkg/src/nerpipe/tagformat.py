"""Conversions between span, BIO and word/slash tag representations.

The word/slash ("flat") scheme tags every token as ``word/label`` with the
same bare label repeated across multi-word entities and ``O`` elsewhere.
Parsers here accept untrusted model output: they never raise on garbage,
they return a count of irregular items instead.
"""

from __future__ import annotations

from .corpus import AnnotatedSentence, EntitySpan
from .errors import TagError


def spans_to_bio(sentence: AnnotatedSentence) -> list[str]:
    """Render spans as one B-/I-/O tag per token."""
    tags = ["O"] * len(sentence.tokens)
    for span in sentence.spans:
        tags[span.start] = f"B-{span.label}"
        for i in range(span.start + 1, span.end):
            tags[i] = f"I-{span.label}"
    return tags


def bio_to_spans(tokens: list[str], tags: list[str]) -> list[EntitySpan]:
    """Extract maximal B-I runs as spans.

    Lenient repair: an I- tag that does not continue a same-label run is
    treated as B-. Tags that are not O/B-/I- shaped raise :class:`TagError`.
    """
    if len(tags) != len(tokens):
        raise TagError(f"{len(tags)} tags for {len(tokens)} tokens", position=0)
    spans: list[EntitySpan] = []
    start: int | None = None
    label = ""

    def close(end: int):
        nonlocal start
        if start is not None:
            spans.append(EntitySpan(start, end, label))
            start = None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
        elif tag.startswith("B-") and len(tag) > 2:
            close(i)
            start, label = i, tag[2:]
        elif tag.startswith("I-") and len(tag) > 2:
            if start is None or tag[2:] != label:
                close(i)
                start, label = i, tag[2:]
        else:
            raise TagError(f"unrecognized BIO tag {tag!r}", position=i)
    close(len(tags))
    return spans


def spans_to_slash(sentence: AnnotatedSentence) -> str:
    """Render every token as ``text/label`` joined by comma-space."""
    labels = ["O"] * len(sentence.tokens)
    for span in sentence.spans:
        for i in range(span.start, span.end):
            labels[i] = span.label
    return ", ".join(f"{tok}/{lab}" for tok, lab in zip(sentence.tokens, labels))


def slash_to_tags(output: str) -> tuple[list[tuple[str, str]], int]:
    """Parse a (possibly garbled) word/slash generation into (word, tag) pairs.

    Splits on comma-space when present, otherwise on whitespace, then on the
    last slash of each item so words containing slashes survive. Items with
    no slash fall back to tag O. Returns the pairs and the number of
    irregular items; never raises.
    """
    text = output.strip()
    if text.endswith("."):
        text = text[:-1].rstrip()
    if not text:
        return [], 0
    items = text.split(", ") if ", " in text else text.split()
    pairs: list[tuple[str, str]] = []
    irregular = 0
    for item in items:
        item = item.strip()
        if not item:
            irregular += 1
            continue
        if "/" not in item:
            pairs.append((item, "O"))
            irregular += 1
            continue
        word, tag = item.rsplit("/", 1)
        if not word or not tag:
            irregular += 1
        pairs.append((word, tag or "O"))
    return pairs, irregular


def parse_bio_lines(output: str) -> tuple[list[tuple[str, str]], int]:
    """Parse token-per-line ``word tag`` output into (word, tag) pairs."""
    pairs: list[tuple[str, str]] = []
    irregular = 0
    for line in output.splitlines():
        fields = line.split()
        if not fields:
            continue
        if len(fields) == 1:
            pairs.append((fields[0], "O"))
            irregular += 1
        else:
            pairs.append((fields[0], fields[-1]))
    return pairs, irregular


def align_predictions(
    gold_tokens: list[str], predicted: list[tuple[str, str]]
) -> list[str]:
    """Map predicted (word, tag) pairs onto gold tokens.

    Longest-common-subsequence alignment on exact, case-sensitive word text.
    Gold tokens matched to a predicted word take its tag, unmatched gold
    tokens get O and unmatched predicted words are discarded, so the result
    always has one tag per gold token.
    """
    n, m = len(gold_tokens), len(predicted)
    tags = ["O"] * n
    if n == 0 or m == 0:
        return tags
    # lcs[i][j] = LCS length of gold_tokens[i:] and predicted[j:]
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = lcs[i], lcs[i + 1]
        gold_word = gold_tokens[i]
        for j in range(m - 1, -1, -1):
            if gold_word == predicted[j][0]:
                row[j] = 1 + below[j + 1]
            else:
                row[j] = max(below[j], row[j + 1])
    i = j = 0
    while i < n and j < m:
        if gold_tokens[i] == predicted[j][0]:
            tags[i] = predicted[j][1]
            i += 1
            j += 1
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    return tags


def flat_tags_to_spans(tokens: list[str], tags: list[str]) -> list[EntitySpan]:
    """Turn maximal runs of identical non-O flat tags into spans."""
    if len(tags) != len(tokens):
        raise TagError(f"{len(tags)} tags for {len(tokens)} tokens", position=0)
    spans: list[EntitySpan] = []
    start: int | None = None
    label = ""
    for i, tag in enumerate(tags):
        if tag == label and start is not None:
            continue
        if start is not None:
            spans.append(EntitySpan(start, i, label))
            start = None
        if tag != "O":
            start, label = i, tag
        else:
            label = ""
    if start is not None:
        spans.append(EntitySpan(start, len(tags), label))
    return spans
