"""Deterministic oracles backed by a TripleStore and a judgment table."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from ..errors import CatalogError
from ..meta import RelationMeta
from ..store import TripleStore
from .base import (
    AnswerStatus,
    ConfidenceLabel,
    Judgment,
    KnowledgeQuery,
    OracleAnswer,
)

_UNKNOWN = OracleAnswer("", None, AnswerStatus.UNKNOWN)


class StoreOracle:
    """Answers knowledge queries from a store instead of a live model.

    Queries address entities by display label.  Ambiguity is conservative:
    a label matching several ids, or a lookup with several values, answers
    unknown rather than guessing.
    """

    def __init__(self, store: TripleStore) -> None:
        self._store = store

    def _resolve_entity(self, label: str) -> str | None:
        ids = self._store.ids_for_label(label)
        if len(ids) == 1:
            return ids[0]
        if not ids and self._store.has_entity(label):
            return label
        return None

    def answer_query(self, query: KnowledgeQuery, meta: RelationMeta) -> OracleAnswer:
        subject = self._resolve_entity(query.subject)
        if subject is None:
            return _UNKNOWN
        objects = self._store.objects_of(subject, query.relation)
        if len(objects) != 1:
            return _UNKNOWN
        label = self._store.label_of(objects[0])
        return OracleAnswer(label, label, AnswerStatus.ANSWERED)

    def answer_inverse_query(
        self, relation: str, object_label: str, meta: RelationMeta
    ) -> OracleAnswer:
        object_id = self._resolve_entity(object_label)
        if object_id is None:
            return _UNKNOWN
        subjects = self._store.subjects_of(relation, object_id)
        if len(subjects) != 1:
            return _UNKNOWN
        label = self._store.label_of(subjects[0])
        return OracleAnswer(label, label, AnswerStatus.ANSWERED)


class TableJudge:
    """Rule judge answering from a fixed verbalization -> judgment table."""

    def __init__(
        self,
        table: Mapping[str, Judgment | ConfidenceLabel | str],
        default: ConfidenceLabel = ConfidenceLabel.UNCERTAIN,
    ) -> None:
        self._table: dict[str, Judgment] = {}
        for verbalization, value in table.items():
            self._table[verbalization] = _coerce_judgment(value)
        self._default = default

    def judge_rule(self, verbalization: str) -> Judgment:
        found = self._table.get(verbalization)
        if found is not None:
            return found
        return Judgment("", self._default)

    @classmethod
    def from_file(cls, path: str | Path) -> "TableJudge":
        """JSON: {"default": <label>, "rules": {<verbalization>: <label or
        {"label": ..., "rationale": ...}>}}."""
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CatalogError(f"cannot read judge table {path}: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("rules"), dict):
            raise CatalogError(f"{path}: expected an object with a 'rules' mapping")
        default = ConfidenceLabel(doc.get("default", "Uncertain"))
        return cls(doc["rules"], default)


def _coerce_judgment(value: Judgment | ConfidenceLabel | str | Mapping) -> Judgment:
    if isinstance(value, Judgment):
        return value
    if isinstance(value, ConfidenceLabel):
        return Judgment("", value)
    if isinstance(value, str):
        return Judgment("", ConfidenceLabel(value))
    return Judgment(value.get("rationale", ""), ConfidenceLabel(value["label"]))
