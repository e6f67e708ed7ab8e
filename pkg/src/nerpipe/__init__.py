"""Low-resource NER data toolkit.

Filters annotated corpora, generates entity-preserving paraphrase
augmentations through a validated LLM loop, builds word/slash
instruction-tuning datasets under a token budget, and scores generations
with entity-level exact-boundary F1.
"""

from .corpus import (
    AnnotatedSentence,
    EntitySpan,
    GuidelineEntry,
    LabelSchema,
    filter_corpus,
    load_schema,
    parse_conll,
    parse_jsonl,
    read_jsonl,
    sample_corpus,
    write_jsonl,
)
from .evaluation import EvalReport, evaluate_generations, render_report, score_sentence
from .instructions import (
    InstructionExample,
    TokenBudget,
    assemble_dataset,
    build_example,
    build_instruction,
    count_tokens,
    emit_training_jsonl,
)
from .masking import MaskedTemplate, mask_entities, reinject_entities, render_template
from .paraphrase import (
    AugmentationRecord,
    ParaphraseConfig,
    augment_corpus,
    augment_sentence,
    build_paraphrase_prompt,
    parse_variants,
)
from .validation import (
    TfEmbedder,
    ValidationOutcome,
    check_tag_count,
    semantic_similarity,
    validate_variant,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSentence",
    "AugmentationRecord",
    "EntitySpan",
    "EvalReport",
    "GuidelineEntry",
    "InstructionExample",
    "LabelSchema",
    "MaskedTemplate",
    "ParaphraseConfig",
    "TfEmbedder",
    "TokenBudget",
    "ValidationOutcome",
    "assemble_dataset",
    "augment_corpus",
    "augment_sentence",
    "build_example",
    "build_instruction",
    "build_paraphrase_prompt",
    "check_tag_count",
    "count_tokens",
    "emit_training_jsonl",
    "evaluate_generations",
    "filter_corpus",
    "load_schema",
    "mask_entities",
    "parse_conll",
    "parse_jsonl",
    "parse_variants",
    "read_jsonl",
    "reinject_entities",
    "render_report",
    "render_template",
    "sample_corpus",
    "score_sentence",
    "semantic_similarity",
    "validate_variant",
    "write_jsonl",
]
