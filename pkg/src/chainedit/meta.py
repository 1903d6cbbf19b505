"""Relation metadata: verbalization templates, grammatical class, symmetry.

Templates carry exactly one {subject} and one {object} slot.  Nominal
relations verbalize as "the <label> of <subject> is <object>"; verbal
relations as "<subject> <label> <object>".
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Iterable, Mapping

from dataclasses import dataclass

from .errors import CatalogError, MissingRelationMetaError

GRAMMATICAL_CLASSES = ("nominal", "verbal")


@dataclass(frozen=True)
class RelationMeta:
    relation: str
    label: str
    verbalization_template: str
    grammatical_class: str = "nominal"
    symmetric: bool = False

    def __post_init__(self) -> None:
        if self.grammatical_class not in GRAMMATICAL_CLASSES:
            raise CatalogError(
                f"relation {self.relation!r}: grammatical_class must be one of {GRAMMATICAL_CLASSES}"
            )
        for slot in ("{subject}", "{object}"):
            if self.verbalization_template.count(slot) != 1:
                raise CatalogError(
                    f"relation {self.relation!r}: template must contain {slot} exactly once"
                )


def nominal_template(label: str) -> str:
    return f"the {label} of {{subject}} is {{object}}"


def verbal_template(label: str) -> str:
    return f"{{subject}} {label} {{object}}"


def default_meta(
    relation: str,
    label: str | None = None,
    grammatical_class: str = "nominal",
    symmetric: bool = False,
) -> RelationMeta:
    label = label if label is not None else relation
    template = nominal_template(label) if grammatical_class == "nominal" else verbal_template(label)
    return RelationMeta(relation, label, template, grammatical_class, symmetric)


class RelationCatalog:
    """Lookup table of RelationMeta with a default-synthesis fallback.

    `get` never fails: relations without explicit metadata synthesize a
    nominal, non-symmetric default (label via `fallback_label`, typically a
    store's label map).  `require` raises for operations whose contract
    demands curated metadata.
    """

    def __init__(
        self,
        metas: Iterable[RelationMeta] = (),
        fallback_label: Callable[[str], str] | None = None,
    ) -> None:
        self._metas: dict[str, RelationMeta] = {}
        for m in metas:
            self._metas[m.relation] = m
        self._fallback_label = fallback_label

    def __contains__(self, relation: str) -> bool:
        return relation in self._metas

    def relations(self) -> list[str]:
        return sorted(self._metas)

    def get(self, relation: str) -> RelationMeta:
        meta = self._metas.get(relation)
        if meta is not None:
            return meta
        label = self._fallback_label(relation) if self._fallback_label else relation
        return default_meta(relation, label)

    def require(self, relation: str) -> RelationMeta:
        meta = self._metas.get(relation)
        if meta is None:
            raise MissingRelationMetaError(relation)
        return meta

    @classmethod
    def from_file(
        cls, path: str | Path, fallback_label: Callable[[str], str] | None = None
    ) -> "RelationCatalog":
        """Load a JSON catalog: {"relations": [{"relation": ..., ...}, ...]}.

        Per-entry keys `label`, `class`, `symmetric`, and `template` are
        optional; omitted ones take the synthesized defaults.
        """
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CatalogError(f"cannot read relation catalog {path}: {exc}") from exc
        rows = doc.get("relations") if isinstance(doc, dict) else None
        if not isinstance(rows, list):
            raise CatalogError(f"{path}: expected an object with a 'relations' list")
        metas = []
        for i, row in enumerate(rows):
            if not isinstance(row, dict) or "relation" not in row:
                raise CatalogError(f"{path}: relations[{i}]: expected an object with 'relation'")
            relation = row["relation"]
            label = row.get("label", relation)
            gclass = row.get("class", "nominal")
            symmetric = bool(row.get("symmetric", False))
            template = row.get("template")
            if template is None:
                template = nominal_template(label) if gclass == "nominal" else verbal_template(label)
            metas.append(RelationMeta(relation, label, template, gclass, symmetric))
        return cls(metas, fallback_label)

    @classmethod
    def from_mapping(cls, rows: Mapping[str, Mapping], **kwargs) -> "RelationCatalog":
        metas = [
            default_meta(
                rel,
                spec.get("label"),
                spec.get("class", "nominal"),
                bool(spec.get("symmetric", False)),
            )
            for rel, spec in rows.items()
        ]
        return cls(metas, **kwargs)


# -- prompt and sentence construction ---------------------------------------


def _capitalize(text: str) -> str:
    return text[0].upper() + text[1:] if text else text


def build_query_prompt(meta: RelationMeta, subject_label: str) -> str:
    """Cloze prompt for a forward query: "The <relation> of <subject> is"."""
    prefix = meta.verbalization_template.split("{object}")[0]
    return _capitalize(prefix.format(subject=subject_label).strip())


def build_inverse_prompt(meta: RelationMeta, object_label: str) -> str:
    """Cloze prompt asking for the subject side of a relation instance."""
    return f"The entity whose {meta.label} is {object_label} is"


def verbalize_fact(meta: RelationMeta, subject_label: str, object_label: str) -> str:
    """Full sentence stating one fact, capitalized, no terminal period."""
    return _capitalize(
        meta.verbalization_template.format(subject=subject_label, object=object_label)
    )


def genitive_phrase(meta: RelationMeta, inner: str) -> str:
    """Possessive chain step: "the spouse of <inner>".

    Derived from the nominal template when it has the canonical shape;
    otherwise falls back to the relation label.
    """
    template = meta.verbalization_template
    suffix = " is {object}"
    if template.endswith(suffix) and "{subject}" in template:
        return template[: -len(suffix)].format(subject=inner)
    return f"the {meta.label} of {inner}"
