"""Oracle value types, answer normalization, and confidence labels."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

from ..meta import RelationMeta


class AnswerStatus(str, Enum):
    ANSWERED = "answered"
    UNKNOWN = "unknown"
    REFUSED = "refused"


@dataclass(frozen=True)
class KnowledgeQuery:
    subject: str
    relation: str


@dataclass(frozen=True)
class OracleAnswer:
    raw_text: str
    entity: str | None
    status: AnswerStatus

    def __post_init__(self) -> None:
        if (self.status == AnswerStatus.ANSWERED) != (self.entity is not None):
            raise ValueError("entity must be present exactly when status is 'answered'")


class ConfidenceLabel(str, Enum):
    TRUE = "True"
    USUALLY_TRUE = "Usually True"
    SOMETIMES_TRUE = "Sometimes True"
    FALSE = "False"
    UNCERTAIN = "Uncertain"


ACCEPTING_LABELS = (ConfidenceLabel.TRUE, ConfidenceLabel.USUALLY_TRUE)


@dataclass(frozen=True)
class Judgment:
    rationale: str
    label: ConfidenceLabel


DEFAULT_REFUSAL_PHRASES: tuple[str, ...] = (
    "i don't know",
    "i do not know",
    "i don't have",
    "cannot determine",
    "can't determine",
    "unable to determine",
    "cannot answer",
    "can't answer",
    "not sure",
    "no information",
)

_SENTENCE_BOUNDARY = re.compile(r"[.!?](?=\s)|\n")
_LEADING_ARTICLE = re.compile(r"(?i)^(?:the|a|an)\s+(\S.*)$", re.DOTALL)


def normalize_answer(text: str) -> str | None:
    """Reduce free text to a bare entity string.

    Trims, keeps only the first sentence, strips terminal punctuation and
    leading articles, and collapses runs of whitespace.  Idempotent.
    Returns None when nothing survives.
    """
    t = text.strip()
    m = _SENTENCE_BOUNDARY.search(t)
    if m:
        t = t[: m.start()]
    t = t.strip().rstrip(".!?,;:").strip()
    while True:
        m2 = _LEADING_ARTICLE.match(t)
        if m2 is None:
            break
        t = m2.group(1)
    t = re.sub(r"\s+", " ", t).strip()
    return t or None


def is_refusal(text: str, phrases: Sequence[str] = DEFAULT_REFUSAL_PHRASES) -> bool:
    lowered = text.casefold()
    return any(p in lowered for p in phrases)


def make_answer(
    raw_text: str, refusal_phrases: Sequence[str] = DEFAULT_REFUSAL_PHRASES
) -> OracleAnswer:
    """Classify raw oracle text into an OracleAnswer."""
    if is_refusal(raw_text, refusal_phrases):
        return OracleAnswer(raw_text, None, AnswerStatus.REFUSED)
    entity = normalize_answer(raw_text)
    if entity is None:
        return OracleAnswer(raw_text, None, AnswerStatus.UNKNOWN)
    return OracleAnswer(raw_text, entity, AnswerStatus.ANSWERED)


_LABEL_PATTERN = re.compile(
    r"answer\s*:\s*(true|usually\s+true|sometimes\s+true|false|uncertain)",
    re.IGNORECASE,
)

_LABEL_BY_KEY = {
    "true": ConfidenceLabel.TRUE,
    "usually true": ConfidenceLabel.USUALLY_TRUE,
    "sometimes true": ConfidenceLabel.SOMETIMES_TRUE,
    "false": ConfidenceLabel.FALSE,
    "uncertain": ConfidenceLabel.UNCERTAIN,
}


def parse_confidence_label(text: str) -> ConfidenceLabel:
    """Last trailing `Answer: <label>` token, case-insensitive.

    Unparseable responses map to Uncertain (and are therefore rejected
    by alignment) rather than raising.
    """
    matches = _LABEL_PATTERN.findall(text)
    if not matches:
        return ConfidenceLabel.UNCERTAIN
    key = re.sub(r"\s+", " ", matches[-1].casefold())
    return _LABEL_BY_KEY[key]


@runtime_checkable
class KnowledgeOracle(Protocol):
    def answer_query(self, query: KnowledgeQuery, meta: RelationMeta) -> OracleAnswer: ...

    def answer_inverse_query(
        self, relation: str, object_label: str, meta: RelationMeta
    ) -> OracleAnswer: ...


@runtime_checkable
class RuleJudge(Protocol):
    def judge_rule(self, verbalization: str) -> Judgment: ...
