#!/usr/bin/env python3
"""Run the whole pipeline hermetically on a synthetic corpus.

Builds a toy annotated corpus, a scripted mock LLM fixture, then drives
filter -> augment -> build-dataset -> evaluate through the CLI. Everything
lands in a work directory; no network access is needed.

Usage: python3 scripts/demo_pipeline.py [workdir]
"""

import json
import random
import sys
from pathlib import Path

from nerpipe.cli import main
from nerpipe.corpus import AnnotatedSentence, EntitySpan, write_jsonl
from nerpipe.masking import mask_entities, render_template
from nerpipe.tagformat import spans_to_slash

PEOPLE = ["Ada", "Turing", "Curie", "Darwin", "Noether"]
PLACES = ["Paris", "Cambridge", "Warsaw", "Vienna", "Kyoto"]
ORGS = ["Acme", "Globex", "Initech"]
FILLER = "the a visited met near worked studied with at in on lectured travelled".split()

SCHEMA = {
    "PER": {"definition": "A named person.", "guidelines": "Tag personal names."},
    "LOC": {"definition": "A named place.", "guidelines": "Tag cities and venues."},
    "ORG": {"definition": "A named organisation.", "guidelines": "Tag org names."},
}


def synth_sentence(rng: random.Random, sid: str) -> AnnotatedSentence:
    tokens, spans = [], []
    entity_last = False  # keep entities apart; adjacent ones are ambiguous in slash form
    for _ in range(rng.randint(10, 14)):
        roll = 1.0 if entity_last else rng.random()
        if roll < 0.12:
            spans.append(EntitySpan(len(tokens), len(tokens) + 1, "PER"))
            tokens.append(rng.choice(PEOPLE))
            entity_last = True
        elif roll < 0.22:
            spans.append(EntitySpan(len(tokens), len(tokens) + 1, "LOC"))
            tokens.append(rng.choice(PLACES))
            entity_last = True
        elif roll < 0.27:
            spans.append(EntitySpan(len(tokens), len(tokens) + 1, "ORG"))
            tokens.append(rng.choice(ORGS))
            entity_last = True
        else:
            tokens.append(rng.choice(FILLER))
            entity_last = False
    return AnnotatedSentence(sid, tokens, spans, "demo")


def write_mock_fixture(path: Path, sentences) -> None:
    """Scripted responses: shuffled-prefix paraphrases of each template."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            if not s.spans:
                continue
            rendered = render_template(mask_entities(s))
            variants = [rendered, f"As it happened, {rendered}"]
            fh.write(
                json.dumps({"match": s.id, "body": {"variants": variants}}) + "\n"
            )


def run(workdir: Path) -> None:
    workdir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(0)
    corpus = [synth_sentence(rng, f"demo#{i}") for i in range(120)]
    raw = workdir / "raw.jsonl"
    write_jsonl(corpus, raw)
    schema_path = workdir / "schema.json"
    schema_path.write_text(json.dumps(SCHEMA, indent=2), encoding="utf-8")

    print("== filter ==")
    assert main(
        ["filter", "--input", str(raw), "--output", str(workdir / "filtered"),
         "--min-words", "10", "--sample", "100", "--seed", "7"]
    ) == 0

    kept = workdir / "filtered" / "kept.jsonl"
    fixture = workdir / "mock_responses.jsonl"
    from nerpipe.corpus import read_jsonl

    write_mock_fixture(fixture, read_jsonl(kept))

    print("== augment (mock) ==")
    assert main(
        ["augment", "--input", str(kept), "--mock", str(fixture),
         "--output", str(workdir / "augmented")]
    ) == 0

    print("== build-dataset ==")
    assert main(
        ["build-dataset", "--schema", str(schema_path), "--gold", str(kept),
         "--augmented", str(workdir / "augmented" / "variants.jsonl"),
         "--output", str(workdir / "dataset")]
    ) == 0

    # Self-evaluation sanity check: rendering the gold as generations
    # must score a perfect 100.
    generations = workdir / "generations.jsonl"
    with open(generations, "w", encoding="utf-8") as fh:
        for s in read_jsonl(kept):
            fh.write(json.dumps({"id": s.id, "output": spans_to_slash(s)}) + "\n")
    print("== evaluate ==")
    assert main(
        ["evaluate", "--gold", str(kept), "--generations", str(generations),
         "--output", str(workdir / "report")]
    ) == 0
    print(f"\nartifacts under {workdir}/")


if __name__ == "__main__":
    run(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_run"))
