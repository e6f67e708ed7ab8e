import json

import pytest
import requests

from nerpipe.errors import TransportError
from nerpipe.llm import (
    LlmRequest,
    LlmResponse,
    MockChatClient,
    OpenAIChatClient,
    RemoteEmbedder,
)


class FakeResponse:
    def __init__(self, payload, status=200):
        self._payload = payload
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"status {self.status_code}")

    def json(self):
        return self._payload


class FakeSession:
    def __init__(self, payload, status=200):
        self.payload = payload
        self.status = status
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append({"url": url, "json": json, "headers": headers})
        return FakeResponse(self.payload, self.status)


class TestOpenAIChatClient:
    def test_payload_shape_and_response_parse(self, monkeypatch):
        monkeypatch.setenv("NERPIPE_API_KEY", "sk-test")
        session = FakeSession(
            {
                "choices": [{"message": {"content": "hello"}, "finish_reason": "stop"}],
                "usage": {"prompt_tokens": 12, "completion_tokens": 3},
            }
        )
        client = OpenAIChatClient("http://llm.local/v1", "tiny-model", session=session)
        got = client.complete(
            LlmRequest(model="", user="say hello", system="be brief", json_response=True)
        )
        assert got == LlmResponse("hello", "stop", 12, 3)
        sent = session.requests[0]
        assert sent["url"] == "http://llm.local/v1/chat/completions"
        assert sent["json"]["model"] == "tiny-model"
        assert sent["json"]["messages"] == [
            {"role": "system", "content": "be brief"},
            {"role": "user", "content": "say hello"},
        ]
        assert sent["json"]["response_format"] == {"type": "json_object"}
        assert sent["headers"]["Authorization"] == "Bearer sk-test"

    def test_http_error_becomes_transport_error(self):
        session = FakeSession({}, status=500)
        client = OpenAIChatClient("http://llm.local/v1", "m", session=session)
        with pytest.raises(TransportError):
            client.complete(LlmRequest(model="m", user="x"))

    def test_unexpected_shape_becomes_transport_error(self):
        session = FakeSession({"surprise": True})
        client = OpenAIChatClient("http://llm.local/v1", "m", session=session)
        with pytest.raises(TransportError):
            client.complete(LlmRequest(model="m", user="x"))

    def test_empty_user_message_rejected(self):
        with pytest.raises(ValueError):
            LlmRequest(model="m", user="")


class TestMockChatClient:
    def test_attempt_counting_per_ref(self):
        client = MockChatClient(
            [
                {"match": "a", "attempt": 1, "body": "first"},
                {"match": "a", "attempt": 2, "body": "second"},
            ]
        )
        req = LlmRequest(model="m", user="x", ref="a")
        assert client.complete(req).text == "first"
        assert client.complete(req).text == "second"

    def test_wildcard_fallback(self):
        client = MockChatClient([{"match": "*", "body": {"variants": ["v"]}}])
        got = client.complete(LlmRequest(model="m", user="x", ref="whatever"))
        assert json.loads(got.text) == {"variants": ["v"]}

    def test_specific_match_beats_wildcard(self):
        client = MockChatClient(
            [
                {"match": "*", "body": "generic"},
                {"match": "a", "body": "specific"},
            ]
        )
        assert client.complete(LlmRequest(model="m", user="x", ref="a")).text == "specific"

    def test_unscripted_request_is_transport_error(self):
        client = MockChatClient([])
        with pytest.raises(TransportError):
            client.complete(LlmRequest(model="m", user="x", ref="a"))

    def test_fixture_round_trip(self, tmp_path):
        path = tmp_path / "fixture.jsonl"
        path.write_text(
            json.dumps({"match": "a", "attempt": 1, "body": {"variants": ["x"]}}) + "\n",
            encoding="utf-8",
        )
        client = MockChatClient.from_jsonl(path)
        got = client.complete(LlmRequest(model="m", user="p", ref="a"))
        assert json.loads(got.text) == {"variants": ["x"]}


class TestRemoteEmbedder:
    def test_vectors_sorted_by_index(self):
        session = FakeSession(
            {
                "data": [
                    {"index": 1, "embedding": [0.0, 1.0]},
                    {"index": 0, "embedding": [1.0, 0.0]},
                ]
            }
        )
        embedder = RemoteEmbedder("http://emb.local/v1", "emb-model", session=session)
        got = embedder.embed(["first", "second"])
        assert got == [[1.0, 0.0], [0.0, 1.0]]
        assert session.requests[0]["url"] == "http://emb.local/v1/embeddings"
        assert session.requests[0]["json"]["input"] == ["first", "second"]

    def test_error_shape(self):
        embedder = RemoteEmbedder(
            "http://emb.local/v1", "m", session=FakeSession({"nope": 1})
        )
        with pytest.raises(TransportError):
            embedder.embed(["x"])
