"""Tab-separated triple ingestion and an immutable, indexed triple store.

Entity and relation identifiers are opaque strings.  Labels are display
text only: lookups and indexes key on ids, never on labels.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple

from .errors import IngestError


class Triple(NamedTuple):
    subject: str
    relation: str
    object: str


def _parse_tsv(path: Path, n_fields: int) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, fields) rows, skipping blanks and # comments."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise IngestError(
                    f"{path}:{lineno}: expected {n_fields} tab-separated fields, got {len(fields)}"
                )
            fields = [f.strip() for f in fields]
            if any(not f for f in fields):
                raise IngestError(f"{path}:{lineno}: empty field")
            yield lineno, fields


class TripleStore:
    """In-memory knowledge graph with subject, object, and relation indexes.

    Instances are frozen at construction time; there is no mutation API.
    All list-valued accessors return id-sorted results so downstream
    pipelines are deterministic.
    """

    def __init__(self, triples: Iterable[Triple], labels: Mapping[str, str] | None = None) -> None:
        triple_set = frozenset(
            Triple(sys.intern(s), sys.intern(r), sys.intern(o)) for s, r, o in triples
        )
        by_subject: dict[str, dict[str, list[str]]] = {}
        by_object: dict[str, dict[str, list[str]]] = {}
        by_relation: dict[str, list[Triple]] = {}
        for t in triple_set:
            by_subject.setdefault(t.subject, {}).setdefault(t.relation, []).append(t.object)
            by_object.setdefault(t.object, {}).setdefault(t.relation, []).append(t.subject)
            by_relation.setdefault(t.relation, []).append(t)
        self._by_subject = {
            s: {r: tuple(sorted(objs)) for r, objs in sorted(rels.items())}
            for s, rels in by_subject.items()
        }
        self._by_object = {
            o: {r: tuple(sorted(subs)) for r, subs in sorted(rels.items())}
            for o, rels in by_object.items()
        }
        self._by_relation = {r: tuple(sorted(ts)) for r, ts in by_relation.items()}
        self._triples = triple_set
        self._labels = dict(labels or {})
        self._label_index: dict[str, tuple[str, ...]] | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_files(cls, triples_path: str | Path, labels_path: str | Path | None = None) -> "TripleStore":
        triples_path = Path(triples_path)
        triples = [Triple(*fields) for _, fields in _parse_tsv(triples_path, 3)]
        labels: dict[str, str] = {}
        if labels_path is not None:
            # Later rows override earlier ones for the same id.
            for _, (ident, label) in _parse_tsv(Path(labels_path), 2):
                labels[ident] = label
        return cls(triples, labels)

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return Triple(*triple) in self._triples

    def all_triples(self) -> list[Triple]:
        return sorted(self._triples)

    def entities(self) -> list[str]:
        return sorted(set(self._by_subject) | set(self._by_object))

    def relations(self) -> list[str]:
        return sorted(self._by_relation)

    def has_relation(self, relation: str) -> bool:
        return relation in self._by_relation

    def has_entity(self, ident: str) -> bool:
        return ident in self._by_subject or ident in self._by_object

    def label_of(self, ident: str) -> str:
        """Display label for an id; ids without a label map to themselves."""
        return self._labels.get(ident, ident)

    def labels(self) -> dict[str, str]:
        return dict(self._labels)

    def ids_for_label(self, label: str) -> tuple[str, ...]:
        """All entity ids carrying this display label (sorted)."""
        if self._label_index is None:
            rev: dict[str, list[str]] = {}
            for ent in self.entities():
                rev.setdefault(self.label_of(ent), []).append(ent)
            self._label_index = {lab: tuple(sorted(ids)) for lab, ids in rev.items()}
        return self._label_index.get(label, ())

    # -- indexed lookups ----------------------------------------------------

    def objects_of(self, subject: str, relation: str) -> tuple[str, ...]:
        return self._by_subject.get(subject, {}).get(relation, ())

    def subjects_of(self, relation: str, object_: str) -> tuple[str, ...]:
        return self._by_object.get(object_, {}).get(relation, ())

    def relations_between(self, subject: str, object_: str) -> tuple[str, ...]:
        rels = self._by_subject.get(subject)
        if not rels:
            return ()
        return tuple(r for r, objs in rels.items() if object_ in objs)

    def out_edges(self, subject: str, cap: int | None = None) -> list[tuple[str, str]]:
        """(relation, object) pairs leaving `subject`, sorted, optionally capped."""
        rels = self._by_subject.get(subject)
        if not rels:
            return []
        edges: list[tuple[str, str]] = []
        for r, objs in rels.items():
            for o in objs:
                edges.append((r, o))
                if cap is not None and len(edges) >= cap:
                    return edges
        return edges

    def instances_of(self, relation: str) -> tuple[Triple, ...]:
        return self._by_relation.get(relation, ())

    def sample_instances(self, relation: str, n: int, seed: int) -> list[Triple]:
        """min(n, population) distinct instances of `relation`, uniform per seed."""
        population = self._by_relation.get(relation, ())
        if n >= len(population):
            return list(population)
        return random.Random(seed).sample(population, n)

    # -- introspection ------------------------------------------------------

    def index_snapshot(self) -> dict[str, dict]:
        """Deep copy of all three indexes, for equivalence checks in tests."""
        return {
            "subject": {s: dict(rels) for s, rels in self._by_subject.items()},
            "object": {o: dict(rels) for o, rels in self._by_object.items()},
            "relation": dict(self._by_relation),
        }


def ingest(triples_path: str | Path, labels_path: str | Path | None = None) -> TripleStore:
    """Build a store from a triple TSV and an optional id/label TSV."""
    return TripleStore.from_files(triples_path, labels_path)
