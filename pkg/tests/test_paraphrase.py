
import pytest

from nerpipe.corpus import AnnotatedSentence, EntitySpan
from nerpipe.errors import ResponseParseError, TransportError, VariantCountError
from nerpipe.llm import LlmRequest, MockChatClient
from nerpipe.masking import mask_entities, render_template
from nerpipe.paraphrase import (
    OUTCOME_FAILED,
    OUTCOME_PARTIAL,
    OUTCOME_SKIPPED,
    OUTCOME_SUCCESS,
    ParaphraseConfig,
    augment_corpus,
    augment_sentence,
    build_paraphrase_prompt,
    parse_variants,
)

from conftest import (
    dropped_placeholder_text,
    identity_mock_entry,
    random_corpus,
)


def gold_sentence(sid="g#0"):
    return AnnotatedSentence(
        sid,
        ["John", "visited", "the", "supermarket", "on", "Tuesday"],
        [EntitySpan(0, 1, "PER"), EntitySpan(3, 4, "LOC")],
        "gold",
    )


class TestPrompt:
    def test_contains_count_and_ends_with_template(self):
        template = render_template(mask_entities(gold_sentence()))
        prompt = build_paraphrase_prompt(template, 2)
        assert "Create 2 new sentences" in prompt
        assert "DO NOT MODIFY any word enclosed in <<>> tags" in prompt
        assert "valid JSON format" in prompt
        assert prompt.endswith(template)

    def test_variant_count_substitution(self):
        assert "Create 5 new sentences" in build_paraphrase_prompt("<<PER>> ran", 5)

    def test_byte_stable(self):
        a = build_paraphrase_prompt("<<PER>> ran", 2)
        b = build_paraphrase_prompt("<<PER>> ran", 2)
        assert a == b

    def test_empty_template_rejected(self):
        with pytest.raises(ValueError):
            build_paraphrase_prompt("", 2)


class TestParseVariants:
    def test_object_form(self):
        assert parse_variants('{"variants":["a","b"]}', 2) == ["a", "b"]

    def test_bare_array(self):
        assert parse_variants('["a","b"]', 2) == ["a", "b"]

    def test_count_error(self):
        with pytest.raises(VariantCountError) as err:
            parse_variants('["a"]', 2)
        assert (err.value.found, err.value.expected) == (1, 2)

    def test_fenced_json(self):
        fenced = '```json\n{"variants":["a","b"]}\n```'
        assert parse_variants(fenced, 2) == ["a", "b"]

    def test_fence_on_one_line(self):
        assert parse_variants('```json {"variants":["a","b"]}```', 2) == ["a", "b"]

    def test_malformed(self):
        with pytest.raises(ResponseParseError):
            parse_variants("not json at all", 1)

    def test_wrong_shapes(self):
        with pytest.raises(ResponseParseError):
            parse_variants('{"other": []}', 0)
        with pytest.raises(ResponseParseError):
            parse_variants('{"variants": [1, 2]}', 2)
        with pytest.raises(ResponseParseError):
            parse_variants('"just a string"', 1)


class FailingClient:
    def complete(self, request: LlmRequest):
        raise TransportError("connection refused")


class RecordingClient(MockChatClient):
    """Mock that also keeps the prompts it was sent."""

    def __init__(self, entries):
        super().__init__(entries)
        self.prompts: list[str] = []

    def complete(self, request: LlmRequest):
        self.prompts.append(request.user)
        return super().complete(request)


class TestAugmentSentence:
    def test_happy_path(self):
        s = gold_sentence()
        client = MockChatClient([identity_mock_entry(s)])
        record = augment_sentence(s, ParaphraseConfig(), client)
        assert record.outcome == OUTCOME_SUCCESS
        assert record.attempts == 1
        assert [v.id for v in record.variants] == ["g#0::v1", "g#0::v2"]
        assert record.scores == [1.0, 1.0]
        for v in record.variants:
            assert v.tokens == s.tokens
            assert v.spans == s.spans

    def test_shortfall_regeneration(self):
        s = gold_sentence()
        rendered = render_template(mask_entities(s))
        bad = dropped_placeholder_text(s)
        client = RecordingClient(
            [
                {"match": s.id, "attempt": 1, "body": {"variants": [rendered, bad]}},
                {"match": s.id, "attempt": 2, "body": {"variants": [rendered]}},
            ]
        )
        record = augment_sentence(s, ParaphraseConfig(), client)
        assert record.outcome == OUTCOME_SUCCESS
        assert record.attempts == 2
        assert record.first_attempt_failures == 1
        # Retry asked only for the shortfall.
        assert "Create 1 new sentences" in client.prompts[-1]

    def test_partial_when_retries_exhausted(self):
        s = gold_sentence()
        rendered = render_template(mask_entities(s))
        bad = dropped_placeholder_text(s)
        entries = [
            {"match": s.id, "attempt": 1, "body": {"variants": [rendered, bad]}},
            {"match": s.id, "attempt": 2, "body": {"variants": [bad]}},
            {"match": s.id, "attempt": 3, "body": {"variants": [bad]}},
        ]
        record = augment_sentence(s, ParaphraseConfig(), MockChatClient(entries))
        assert record.outcome == OUTCOME_PARTIAL
        assert len(record.variants) == 1
        assert record.attempts == 3

    def test_validation_exhaustion(self):
        s = gold_sentence()
        config = ParaphraseConfig(max_retries=2)
        client = MockChatClient([{"match": "*", "body": "garbage, not json"}])
        record = augment_sentence(s, config, client)
        assert record.outcome == OUTCOME_FAILED
        assert record.reason == "validation"
        assert record.attempts == config.max_retries + 1

    def test_transport_exhaustion(self):
        record = augment_sentence(gold_sentence(), ParaphraseConfig(), FailingClient())
        assert record.outcome == OUTCOME_FAILED
        assert record.reason == "transport"

    def test_zero_span_sentence_skipped(self):
        s = AnnotatedSentence("p#0", ["plain", "text"], [], "gold")
        record = augment_sentence(s, ParaphraseConfig(), FailingClient())
        assert record.outcome == OUTCOME_SKIPPED
        assert record.attempts == 0

    def test_temperature_schedule_followed(self):
        s = gold_sentence()
        bad = dropped_placeholder_text(s)
        client = MockChatClient([{"match": "*", "body": {"variants": [bad, bad]}}])
        config = ParaphraseConfig(temperature_schedule=[0.7, 1.0, 1.2])
        augment_sentence(s, config, client)
        assert [t for _, _, t in client.calls] == [0.7, 1.0, 1.2]

    def test_flaky_embedder_is_recorded_not_thrown(self):
        s = gold_sentence()

        class FlakyEmbedder:
            def embed(self, texts):
                raise TransportError("embedding endpoint down")

        client = MockChatClient([identity_mock_entry(s)])
        record = augment_sentence(
            s, ParaphraseConfig(max_retries=0), client, FlakyEmbedder()
        )
        assert record.outcome == OUTCOME_FAILED
        assert record.reason == "validation"

    def test_per_label_imbalance_rejected_despite_matching_count(self):
        s = gold_sentence()
        swapped = "<<PER>> met <<PER>>"  # count 2 matches but LOC is missing
        client = MockChatClient(
            [{"match": "*", "body": {"variants": [swapped, swapped]}}]
        )
        record = augment_sentence(s, ParaphraseConfig(max_retries=0), client)
        assert record.outcome == OUTCOME_FAILED


class TestConfig:
    def test_schedule_must_cover_attempts(self):
        with pytest.raises(ValueError):
            ParaphraseConfig(max_retries=3, temperature_schedule=[0.7])

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            ParaphraseConfig(similarity_threshold=1.5)


class TestAugmentCorpus:
    def test_hundred_gold_two_variants_each(self):
        corpus = random_corpus(11, 100, require_span=True)
        client = MockChatClient([identity_mock_entry(s) for s in corpus])
        records, summary = augment_corpus(corpus, ParaphraseConfig(), client)
        assert summary["kept_variants"] == 200
        assert summary["failure_rate"] == 0.0
        assert summary["success"] == 100

    def test_empty_input(self):
        records, summary = augment_corpus([], ParaphraseConfig(), FailingClient())
        assert records == []
        assert summary["inputs"] == 0
        assert summary["kept_variants"] == 0

    def test_order_preserved_under_parallelism(self):
        corpus = random_corpus(12, 40, require_span=True)
        client = MockChatClient([identity_mock_entry(s) for s in corpus])
        config = ParaphraseConfig(max_parallel_requests=8)
        records, _ = augment_corpus(corpus, config, client)
        assert [r.parent_id for r in records] == [s.id for s in corpus]

    def test_scripted_failure_rate_accounting(self):
        corpus = random_corpus(13, 100, require_span=True)
        entries = []
        failing = set(range(0, 100, 7))  # 15 sentences fail attempt 1 entirely
        assert len(failing) == 15
        for i, s in enumerate(corpus):
            rendered = render_template(mask_entities(s))
            bad = dropped_placeholder_text(s)
            if i in failing:
                entries.append(
                    {"match": s.id, "attempt": 1, "body": {"variants": [bad, bad]}}
                )
                entries.append(
                    {"match": s.id, "attempt": 2, "body": {"variants": [rendered, rendered]}}
                )
            else:
                entries.append(identity_mock_entry(s))
        records, summary = augment_corpus(
            corpus, ParaphraseConfig(), MockChatClient(entries)
        )
        assert summary["first_attempt_failure_rate"] == 0.15
        assert summary["regenerations"] == 15
        assert summary["kept_variants"] == 200
        assert summary["failure_rate"] == 0.0

    def test_deterministic_under_parallelism(self):
        corpus = random_corpus(14, 30, require_span=True)
        config = ParaphraseConfig(max_parallel_requests=6)

        def run():
            client = MockChatClient([identity_mock_entry(s) for s in corpus])
            return augment_corpus(corpus, config, client)

        records_a, summary_a = run()
        records_b, summary_b = run()
        assert summary_a == summary_b
        assert [r.parent_id for r in records_a] == [r.parent_id for r in records_b]
        assert [[v.tokens for v in r.variants] for r in records_a] == [
            [v.tokens for v in r.variants] for r in records_b
        ]
