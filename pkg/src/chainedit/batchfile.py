"""EditBatch serialization: the JSONL file format and the HTTP object form.

File format: one JSON object per line.  The first line is the original
edit and carries the version header; derived lines follow in derivation
order; skipped lines trail.
"""

from __future__ import annotations

import json
from pathlib import Path

from .engine import DerivedEdit, EditBatch, EditRequest, QueryRecord, SkippedDirective
from .errors import BatchFormatError

BATCH_VERSION = "chainedit-batch/1"


def batch_to_lines(batch: EditBatch) -> list[dict]:
    lines: list[dict] = [
        {
            "type": "original",
            "version": BATCH_VERSION,
            "subject": batch.original.subject,
            "relation": batch.original.relation,
            "object": batch.original.new_object,
        }
    ]
    for d in batch.derived:
        lines.append(
            {
                "type": "derived",
                "subject": d.subject,
                "relation": d.relation,
                "object": d.object,
                "directive_id": d.directive_id,
                "queries": [
                    {"prompt": q.prompt, "answer": q.answer, "status": q.status}
                    for q in d.queries
                ],
            }
        )
    for s in batch.skipped:
        lines.append({"type": "skipped", "directive_id": s.directive_id, "reason": s.reason})
    return lines


def save_batch(batch: EditBatch, path: str | Path) -> None:
    text = "\n".join(json.dumps(line, ensure_ascii=False) for line in batch_to_lines(batch))
    Path(path).write_text(text + "\n", encoding="utf-8")


def _query_records(rows: list) -> tuple[QueryRecord, ...]:
    return tuple(QueryRecord(q["prompt"], q["answer"], q["status"]) for q in rows)


def load_batch(path: str | Path) -> EditBatch:
    lines = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                lines.append((lineno, json.loads(raw)))
            except ValueError as exc:
                raise BatchFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
    if not lines:
        raise BatchFormatError(f"{path}: empty batch file")
    try:
        return _batch_from_lines([doc for _, doc in lines])
    except BatchFormatError as exc:
        raise BatchFormatError(f"{path}: {exc}") from exc


def batch_to_dict(batch: EditBatch) -> dict:
    """Single-object wire form used by the subject-model protocol."""
    lines = batch_to_lines(batch)
    original = {k: v for k, v in lines[0].items() if k != "type"}
    return {
        "version": original.pop("version"),
        "original": original,
        "derived": [
            {k: v for k, v in line.items() if k != "type"}
            for line in lines
            if line["type"] == "derived"
        ],
        "skipped": [
            {k: v for k, v in line.items() if k != "type"}
            for line in lines
            if line["type"] == "skipped"
        ],
    }


def batch_from_dict(doc: dict) -> EditBatch:
    if not isinstance(doc, dict):
        raise BatchFormatError("batch must be a JSON object")
    if doc.get("version") != BATCH_VERSION:
        raise BatchFormatError(
            f"expected batch version {BATCH_VERSION!r}, got {doc.get('version')!r}"
        )
    lines = [{"type": "original", "version": BATCH_VERSION, **_require_dict(doc, "original")}]
    for row in doc.get("derived", []):
        lines.append({"type": "derived", **row})
    for row in doc.get("skipped", []):
        lines.append({"type": "skipped", **row})
    return _batch_from_lines(lines)


def _require_dict(doc: dict, key: str) -> dict:
    value = doc.get(key)
    if not isinstance(value, dict):
        raise BatchFormatError(f"missing or invalid {key!r} object")
    return value


def _batch_from_lines(lines: list[dict]) -> EditBatch:
    try:
        head = lines[0]
        if head.get("type") != "original":
            raise BatchFormatError("first line must have type 'original'")
        if head.get("version") != BATCH_VERSION:
            raise BatchFormatError(
                f"expected batch version {BATCH_VERSION!r}, got {head.get('version')!r}"
            )
        original = EditRequest(head["subject"], head["relation"], head["object"])
        derived: list[DerivedEdit] = []
        skipped: list[SkippedDirective] = []
        for doc in lines[1:]:
            kind = doc.get("type")
            if kind == "derived":
                if skipped:
                    raise BatchFormatError("derived line after skipped lines")
                derived.append(
                    DerivedEdit(
                        doc["subject"],
                        doc["relation"],
                        doc["object"],
                        doc["directive_id"],
                        _query_records(doc.get("queries", [])),
                    )
                )
            elif kind == "skipped":
                skipped.append(SkippedDirective(doc["directive_id"], doc["reason"]))
            else:
                raise BatchFormatError(f"unexpected line type {kind!r}")
        return EditBatch(original, tuple(derived), tuple(skipped))
    except (KeyError, TypeError, ValueError) as exc:
        raise BatchFormatError(f"malformed batch line: {exc}") from exc
