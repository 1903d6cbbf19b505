"""Reader for the edit-batch wire object accepted by POST /apply.

The producing toolkit serializes a batch as one JSON object:

    {
      "version": "chainedit-batch/1",
      "original": {"subject": ..., "relation": ..., "object": ...},
      "derived":  [{"subject": ..., "relation": ..., "object": ...,
                    "directive_id": ..., "queries": [...]}, ...],
      "skipped":  [{"directive_id": ..., "reason": ...}, ...]
    }

This module reads that shape and nothing else.  The adapter deliberately
keeps its own reader so it depends only on the documented format, never
on the producer's code.  Skipped rows are audit trail and carry no
edits; derived rows keep their directive_id as provenance but only the
triple is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

BATCH_VERSION = "chainedit-batch/1"


class WireFormatError(ValueError):
    """The posted batch does not match the wire format."""


@dataclass(frozen=True)
class EditTriple:
    subject: str
    relation: str
    object: str


@dataclass(frozen=True)
class WireBatch:
    original: EditTriple
    derived: tuple[EditTriple, ...]

    @property
    def edits(self) -> tuple[EditTriple, ...]:
        """All facts to install, original edit first."""
        return (self.original,) + self.derived


def _triple(row: object, where: str) -> EditTriple:
    if not isinstance(row, dict):
        raise WireFormatError(f"missing or invalid {where} object")
    values = []
    for key in ("subject", "relation", "object"):
        value = row.get(key)
        if not isinstance(value, str) or not value:
            raise WireFormatError(f"{where}.{key}: expected a non-empty string")
        values.append(value)
    return EditTriple(*values)


def parse_batch(doc: object) -> WireBatch:
    """Validate a posted batch object and pull out its edit triples."""
    if not isinstance(doc, dict):
        raise WireFormatError("batch must be a JSON object")
    version = doc.get("version")
    if version != BATCH_VERSION:
        raise WireFormatError(
            f"unsupported batch version {version!r} (expected {BATCH_VERSION!r})"
        )
    original = _triple(doc.get("original"), "original")
    rows = doc.get("derived", [])
    if not isinstance(rows, list):
        raise WireFormatError("'derived' must be a list")
    derived = []
    for i, row in enumerate(rows):
        triple = _triple(row, f"derived[{i}]")
        if not isinstance(row.get("directive_id"), str):
            raise WireFormatError(f"derived[{i}].directive_id: expected a string")
        derived.append(triple)
    skipped = doc.get("skipped", [])
    if not isinstance(skipped, list):
        raise WireFormatError("'skipped' must be a list")
    return WireBatch(original, tuple(derived))
