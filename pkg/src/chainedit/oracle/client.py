"""Live chat-completion client: retries, pacing, auth, deterministic parsing.

Wire shape: POST {endpoint} with {"model", "messages", "temperature"};
the reply text is read from choices[0].message.content.
"""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Sequence

import httpx

from ..errors import OracleTransportError
from ..meta import RelationMeta, build_inverse_prompt, build_query_prompt
from .base import (
    DEFAULT_REFUSAL_PHRASES,
    Judgment,
    KnowledgeQuery,
    OracleAnswer,
    make_answer,
    parse_confidence_label,
)
from .prompts import judge_messages, query_messages

logger = logging.getLogger(__name__)

AUTH_TOKEN_ENV = "CHAINEDIT_ORACLE_TOKEN"

_ANSWER_TOKEN = re.compile(r"answer\s*:", re.IGNORECASE)


@dataclass(frozen=True)
class OracleConfig:
    endpoint: str
    model: str = "default"
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    min_request_interval: float = 0.0
    auth_token: str | None = None
    refusal_phrases: tuple[str, ...] = DEFAULT_REFUSAL_PHRASES


class ChatOracle:
    """KnowledgeOracle and RuleJudge over an HTTP chat endpoint.

    Retries transport failures and 5xx/429 replies with exponential
    backoff, then raises OracleTransportError.  `min_request_interval`
    paces request starts globally (thread-safe), so callers may issue
    queries concurrently without exceeding the rate cap.
    """

    def __init__(self, config: OracleConfig, transport: httpx.BaseTransport | None = None) -> None:
        self._config = config
        self._client = httpx.Client(timeout=config.timeout, transport=transport)
        self._pace_lock = threading.Lock()
        self._next_start = 0.0

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ChatOracle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- transport -----------------------------------------------------------

    def _headers(self) -> dict[str, str]:
        token = self._config.auth_token or os.environ.get(AUTH_TOKEN_ENV)
        headers = {"Content-Type": "application/json"}
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _pace(self) -> None:
        interval = self._config.min_request_interval
        if interval <= 0:
            return
        with self._pace_lock:
            now = time.monotonic()
            wait = self._next_start - now
            self._next_start = max(now, self._next_start) + interval
        if wait > 0:
            time.sleep(wait)

    def _chat(self, messages: Sequence[dict]) -> str:
        body = {
            "model": self._config.model,
            "messages": list(messages),
            "temperature": self._config.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self._config.max_retries + 1):
            if attempt:
                delay = self._config.backoff_base * (2 ** (attempt - 1))
                logger.debug("retrying oracle call in %.2fs (attempt %d)", delay, attempt + 1)
                time.sleep(delay)
            self._pace()
            try:
                response = self._client.post(
                    self._config.endpoint, json=body, headers=self._headers()
                )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code == 200:
                return _extract_content(response)
            if response.status_code in (429,) or response.status_code >= 500:
                last_error = OracleTransportError(
                    f"oracle endpoint returned {response.status_code}"
                )
                continue
            raise OracleTransportError(
                f"oracle endpoint returned {response.status_code}: {response.text[:200]}"
            )
        raise OracleTransportError(
            f"oracle unreachable after {self._config.max_retries + 1} attempts: {last_error}"
        )

    # -- KnowledgeOracle -----------------------------------------------------

    def answer_query(self, query: KnowledgeQuery, meta: RelationMeta) -> OracleAnswer:
        prompt = build_query_prompt(meta, query.subject)
        return make_answer(self._chat(query_messages(prompt)), self._config.refusal_phrases)

    def answer_inverse_query(
        self, relation: str, object_label: str, meta: RelationMeta
    ) -> OracleAnswer:
        prompt = build_inverse_prompt(meta, object_label)
        return make_answer(self._chat(query_messages(prompt)), self._config.refusal_phrases)

    # -- RuleJudge -----------------------------------------------------------

    def judge_rule(self, verbalization: str) -> Judgment:
        content = self._chat(judge_messages(verbalization))
        label = parse_confidence_label(content)
        matches = list(_ANSWER_TOKEN.finditer(content))
        rationale = content[: matches[-1].start()].strip() if matches else content.strip()
        return Judgment(rationale, label)


def _extract_content(response: httpx.Response) -> str:
    try:
        content = response.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise OracleTransportError(f"malformed completion payload: {exc}") from exc
    if not isinstance(content, str):
        raise OracleTransportError("completion content is not a string")
    return content
