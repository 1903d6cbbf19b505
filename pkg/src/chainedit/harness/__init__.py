"""Evaluation harness: subject models, scoring, and the metric report."""

from .evaluate import (
    CaseResult,
    DeltaTable,
    MetricReport,
    MetricScore,
    QueryResult,
    compare_reports,
    evaluate,
)
from .scoring import score_answer
from .subject import RemoteSubject, SubjectModel, SymbolicSubject

__all__ = [
    "CaseResult",
    "DeltaTable",
    "MetricReport",
    "MetricScore",
    "QueryResult",
    "RemoteSubject",
    "SubjectModel",
    "SymbolicSubject",
    "compare_reports",
    "evaluate",
    "score_answer",
]
