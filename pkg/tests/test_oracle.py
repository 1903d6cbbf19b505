"""Oracle layer: answer normalization, mock backends, the HTTP client,
and record/replay transports."""

import json
import time

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainedit.errors import CatalogError, OracleTransportError, ReportError
from chainedit.meta import default_meta
from chainedit.oracle.base import (
    AnswerStatus,
    ConfidenceLabel,
    KnowledgeQuery,
    is_refusal,
    make_answer,
    normalize_answer,
    parse_confidence_label,
)
from chainedit.oracle.client import ChatOracle, OracleConfig
from chainedit.oracle.mock import StoreOracle, TableJudge
from chainedit.oracle.replay import (
    RecordingTransport,
    ReplayTransport,
    load_fixture,
    request_hash,
)
from chainedit.store import Triple, TripleStore

FATHER = default_meta("father")


class TestNormalizeAnswer:
    @pytest.mark.parametrize(
        ("raw", "expected"),
        [
            ("Paris", "Paris"),
            ("  Paris.  ", "Paris"),
            ("Paris. It is the capital of France.", "Paris"),
            ("The Eiffel Tower", "Eiffel Tower"),
            ("an   orange\tcat", "orange cat"),
            ("THE answer", "answer"),
            ("Paris, France", "Paris, France"),
            ("first\nsecond", "first"),
            ("...", None),
            ("   ", None),
            ("the", "the"),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_answer(raw) == expected

    def test_stacked_articles_strip_fully(self):
        assert normalize_answer("the the city") == "city"

    @given(st.text(max_size=80))
    def test_property_idempotent(self, text):
        once = normalize_answer(text)
        if once is not None:
            assert normalize_answer(once) == once


class TestRefusalAndClassification:
    def test_refusal_matches_case_insensitively(self):
        assert is_refusal("I DON'T KNOW the answer")
        assert not is_refusal("Paris")

    def test_custom_phrases(self):
        assert is_refusal("that is classified", phrases=("classified",))

    def test_make_answer_statuses(self):
        refused = make_answer("I cannot answer that question.")
        assert (refused.status, refused.entity) == (AnswerStatus.REFUSED, None)
        assert refused.raw_text == "I cannot answer that question."
        unknown = make_answer("?!")
        assert unknown.status == AnswerStatus.UNKNOWN
        answered = make_answer("The Louvre.")
        assert (answered.status, answered.entity) == (AnswerStatus.ANSWERED, "Louvre")

    def test_answer_entity_presence_is_enforced(self):
        from chainedit.oracle.base import OracleAnswer

        with pytest.raises(ValueError, match="entity"):
            OracleAnswer("x", None, AnswerStatus.ANSWERED)
        with pytest.raises(ValueError, match="entity"):
            OracleAnswer("x", "x", AnswerStatus.UNKNOWN)


class TestParseConfidenceLabel:
    @pytest.mark.parametrize(
        ("text", "label"),
        [
            ("Fathers' siblings' children... Answer: True", ConfidenceLabel.TRUE),
            ("answer: usually  true", ConfidenceLabel.USUALLY_TRUE),
            ("Answer : Sometimes True", ConfidenceLabel.SOMETIMES_TRUE),
            ("Answer: True\nOn reflection. Answer: False", ConfidenceLabel.FALSE),
            ("no verdict given", ConfidenceLabel.UNCERTAIN),
            ("Answer: definitely", ConfidenceLabel.UNCERTAIN),
        ],
    )
    def test_examples(self, text, label):
        assert parse_confidence_label(text) == label


class TestStoreOracle:
    def test_answers_unique_lookup(self, family_oracle_store):
        oracle = StoreOracle(family_oracle_store)
        answer = oracle.answer_query(KnowledgeQuery("Alice", "father"), FATHER)
        assert (answer.status, answer.entity) == (AnswerStatus.ANSWERED, "Bob")

    def test_unknown_subject_and_missing_edge(self, family_oracle_store):
        oracle = StoreOracle(family_oracle_store)
        assert oracle.answer_query(KnowledgeQuery("Zed", "father"), FATHER).status \
            == AnswerStatus.UNKNOWN
        assert oracle.answer_query(KnowledgeQuery("Bob", "father"), FATHER).status \
            == AnswerStatus.UNKNOWN

    def test_multi_valued_lookup_is_unknown(self):
        store = TripleStore([Triple("a", "child", "b"), Triple("a", "child", "c")])
        oracle = StoreOracle(store)
        meta = default_meta("child")
        assert oracle.answer_query(KnowledgeQuery("a", "child"), meta).status \
            == AnswerStatus.UNKNOWN

    def test_queries_resolve_display_labels(self):
        store = TripleStore(
            [Triple("Q1", "capital", "Q2")],
            labels={"Q1": "France", "Q2": "Paris"},
        )
        oracle = StoreOracle(store)
        answer = oracle.answer_query(KnowledgeQuery("France", "capital"), default_meta("capital"))
        assert answer.entity == "Paris"

    def test_ambiguous_label_is_unknown(self):
        store = TripleStore(
            [Triple("Q1", "capital", "Q3"), Triple("Q2", "capital", "Q3")],
            labels={"Q1": "Georgia", "Q2": "Georgia", "Q3": "Atlanta"},
        )
        oracle = StoreOracle(store)
        answer = oracle.answer_query(KnowledgeQuery("Georgia", "capital"), default_meta("capital"))
        assert answer.status == AnswerStatus.UNKNOWN

    def test_inverse_lookup(self, family_oracle_store):
        oracle = StoreOracle(family_oracle_store)
        answer = oracle.answer_inverse_query("father", "Bob", FATHER)
        assert answer.entity == "Alice"
        many = TripleStore([Triple("a", "likes", "x"), Triple("b", "likes", "x")])
        assert StoreOracle(many).answer_inverse_query(
            "likes", "x", default_meta("likes")
        ).status == AnswerStatus.UNKNOWN


class TestTableJudge:
    def test_exact_match_and_default(self):
        judge = TableJudge({"claim A": ConfidenceLabel.TRUE})
        assert judge.judge_rule("claim A").label == ConfidenceLabel.TRUE
        assert judge.judge_rule("claim B").label == ConfidenceLabel.UNCERTAIN
        strict = TableJudge({}, default=ConfidenceLabel.FALSE)
        assert strict.judge_rule("anything").label == ConfidenceLabel.FALSE

    def test_from_file_loads_labels_and_rationales(self, fixtures_dir):
        judge = TableJudge.from_file(fixtures_dir / "alignment" / "judge_table.json")
        verdict = judge.judge_rule(
            "If the father of A is B, then the sibling of A is the child of B"
        )
        assert verdict.label == ConfidenceLabel.TRUE
        assert verdict.rationale
        assert judge.judge_rule("unseen claim").label == ConfidenceLabel.UNCERTAIN

    def test_from_file_errors(self, tmp_path):
        with pytest.raises(CatalogError, match="cannot read"):
            TableJudge.from_file(tmp_path / "absent.json")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"rules": ["not", "a", "mapping"]}))
        with pytest.raises(CatalogError, match="rules"):
            TableJudge.from_file(bad)


def completion(text: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def oracle_with(handler, **config_overrides) -> ChatOracle:
    config = OracleConfig(
        endpoint="https://oracle.test/v1/chat", backoff_base=0.0, **config_overrides
    )
    return ChatOracle(config, transport=httpx.MockTransport(handler))


class TestChatOracle:
    def test_answer_query_round_trip(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return completion("Paris.")

        with oracle_with(handler, model="test-model") as oracle:
            answer = oracle.answer_query(
                KnowledgeQuery("France", "capital"), default_meta("capital")
            )
        assert (answer.status, answer.entity) == (AnswerStatus.ANSWERED, "Paris")
        assert seen["body"]["model"] == "test-model"
        assert seen["body"]["messages"][-1]["content"] == "The capital of France is"

    def test_inverse_query_prompt(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return completion("Alice")

        with oracle_with(handler) as oracle:
            oracle.answer_inverse_query("father", "Bob", FATHER)
        assert seen["body"]["messages"][-1]["content"] == "The entity whose father is Bob is"

    def test_retries_transient_failures(self):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(503, text="busy")
            return completion("Rome")

        with oracle_with(handler) as oracle:
            answer = oracle.answer_query(KnowledgeQuery("Italy", "capital"), default_meta("capital"))
        assert answer.entity == "Rome"
        assert len(calls) == 3

    def test_retries_rate_limits_then_gives_up(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(429, text="slow down")

        with oracle_with(handler, max_retries=1) as oracle:
            with pytest.raises(OracleTransportError, match="after 2 attempts"):
                oracle.answer_query(KnowledgeQuery("x", "y"), default_meta("y"))
        assert len(calls) == 2

    def test_client_errors_do_not_retry(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(401, text="bad token")

        with oracle_with(handler) as oracle:
            with pytest.raises(OracleTransportError, match="401"):
                oracle.answer_query(KnowledgeQuery("x", "y"), default_meta("y"))
        assert len(calls) == 1

    def test_malformed_completion_payload(self):
        def handler(request):
            return httpx.Response(200, json={"unexpected": True})

        with oracle_with(handler) as oracle:
            with pytest.raises(OracleTransportError, match="malformed completion payload"):
                oracle.answer_query(KnowledgeQuery("x", "y"), default_meta("y"))

    def test_auth_token_from_config_and_environment(self, monkeypatch):
        seen = []

        def handler(request):
            seen.append(request.headers.get("Authorization"))
            return completion("ok")

        monkeypatch.delenv("CHAINEDIT_ORACLE_TOKEN", raising=False)
        with oracle_with(handler) as oracle:
            oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))
        with oracle_with(handler, auth_token="s3cret") as oracle:
            oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))
        monkeypatch.setenv("CHAINEDIT_ORACLE_TOKEN", "from-env")
        with oracle_with(handler) as oracle:
            oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))
        assert seen == [None, "Bearer s3cret", "Bearer from-env"]

    def test_pacing_spaces_out_request_starts(self):
        def handler(request):
            return completion("ok")

        with oracle_with(handler, min_request_interval=0.05) as oracle:
            start = time.monotonic()
            oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))
            oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))
            elapsed = time.monotonic() - start
        assert elapsed >= 0.045

    def test_judge_rule_splits_rationale_from_verdict(self):
        def handler(request):
            return completion("Siblings share a father.\nAnswer: Usually True")

        with oracle_with(handler) as oracle:
            judgment = oracle.judge_rule("If the father of A is B, ...")
        assert judgment.label == ConfidenceLabel.USUALLY_TRUE
        assert judgment.rationale == "Siblings share a father."

    def test_judge_messages_carry_worked_examples(self):
        seen = {}

        def handler(request):
            seen["body"] = json.loads(request.content)
            return completion("Answer: True")

        with oracle_with(handler) as oracle:
            oracle.judge_rule("If the mother of A is B, then the father of A is the spouse of B")
        messages = seen["body"]["messages"]
        assert messages[0]["role"] == "system"
        assert len(messages) > 3
        assert messages[-1]["role"] == "user"


class TestReplay:
    def test_request_hash_ignores_key_order(self):
        a = {"model": "m", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.0}
        b = {"temperature": 0.0, "messages": [{"role": "user", "content": "hi"}], "model": "m"}
        assert request_hash(a) == request_hash(b)
        assert request_hash(a) != request_hash({**a, "model": "other"})

    def test_record_then_replay_round_trip(self, tmp_path):
        tape = tmp_path / "tape.jsonl"

        def handler(request):
            return completion("Madrid.")

        recording = RecordingTransport(httpx.MockTransport(handler), tape)
        config = OracleConfig(endpoint="https://oracle.test/v1/chat", backoff_base=0.0)
        with ChatOracle(config, transport=recording) as live:
            first = live.answer_query(KnowledgeQuery("Spain", "capital"), default_meta("capital"))
        assert first.entity == "Madrid"
        assert len(tape.read_text().splitlines()) == 1

        with ChatOracle(config, transport=ReplayTransport(tape)) as replayed:
            again = replayed.answer_query(
                KnowledgeQuery("Spain", "capital"), default_meta("capital")
            )
        assert again == first

    def test_replay_unknown_request_fails_fast(self, tmp_path):
        tape = tmp_path / "tape.jsonl"
        tape.write_text("")
        config = OracleConfig(endpoint="https://oracle.test/v1/chat", backoff_base=0.0)
        with ChatOracle(config, transport=ReplayTransport(tape)) as oracle:
            with pytest.raises(OracleTransportError, match="404"):
                oracle.answer_query(KnowledgeQuery("a", "b"), default_meta("b"))

    def test_load_fixture_names_bad_line(self, tmp_path):
        tape = tmp_path / "tape.jsonl"
        tape.write_text('{"request_hash": "h", "response_text": "ok"}\n{"nope": 1}\n')
        with pytest.raises(ReportError, match=r"tape\.jsonl:2"):
            load_fixture(tape)
