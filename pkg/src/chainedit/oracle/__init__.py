"""Knowledge oracle abstraction: live chat endpoint, mock store, judging."""

from .base import (
    ACCEPTING_LABELS,
    AnswerStatus,
    ConfidenceLabel,
    DEFAULT_REFUSAL_PHRASES,
    Judgment,
    KnowledgeOracle,
    KnowledgeQuery,
    OracleAnswer,
    RuleJudge,
    make_answer,
    normalize_answer,
    parse_confidence_label,
)
from .client import ChatOracle, OracleConfig
from .mock import StoreOracle, TableJudge
from .replay import ReplayTransport, RecordingTransport, request_hash

__all__ = [
    "ACCEPTING_LABELS",
    "AnswerStatus",
    "ChatOracle",
    "ConfidenceLabel",
    "DEFAULT_REFUSAL_PHRASES",
    "Judgment",
    "KnowledgeOracle",
    "KnowledgeQuery",
    "OracleAnswer",
    "OracleConfig",
    "RecordingTransport",
    "ReplayTransport",
    "RuleJudge",
    "StoreOracle",
    "TableJudge",
    "make_answer",
    "normalize_answer",
    "parse_confidence_label",
    "request_hash",
]
