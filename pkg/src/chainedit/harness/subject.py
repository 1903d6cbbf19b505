"""Subject models: the system under edit, local or remote.

A subject model exposes three operations — apply an edit batch, answer
a free-text prompt, revert to the pre-edit state.  SymbolicSubject is a
deterministic triple-store stand-in used for end-to-end tests;
RemoteSubject speaks the HTTP subject protocol to an external service.
"""

from __future__ import annotations

import re
import uuid
from typing import Mapping, Protocol, runtime_checkable

import httpx

from ..batchfile import batch_to_dict
from ..engine import EditBatch
from ..errors import ProtocolError
from ..meta import RelationCatalog, build_query_prompt
from ..store import TripleStore

IN_PROMPT_MARKER = "Complete the following sentence:"


@runtime_checkable
class SubjectModel(Protocol):
    """The apply/query/revert surface every subject implementation offers."""

    def apply_batch(self, batch: EditBatch) -> None: ...

    def query(self, prompt: str) -> str: ...

    def revert(self) -> None: ...


class SymbolicSubject:
    """Triple-store subject with an edit overlay.

    Prompts are parsed back into (subject, relation) pairs by matching
    them against the catalog's query templates; the overlay is consulted
    before the base store, and revert clears the overlay exactly.  An
    alias map lets prompts refer to subjects by alternate names.
    """

    def __init__(
        self,
        base: TripleStore,
        catalog: RelationCatalog | None = None,
        aliases: Mapping[str, str] | None = None,
    ) -> None:
        self._base = base
        self._catalog = catalog or RelationCatalog(fallback_label=base.label_of)
        self._aliases = dict(aliases or {})
        self._overlay: dict[tuple[str, str], str] = {}
        self._patterns: list[tuple[str, re.Pattern[str]]] | None = None
        self._subject_index: dict[str, str] | None = None

    # -- state transitions ----------------------------------------------

    def apply_batch(self, batch: EditBatch) -> None:
        for subject, relation, obj in batch.triples():
            self._overlay[(subject, relation)] = obj
        self._patterns = None
        self._subject_index = None

    def revert(self) -> None:
        self._overlay.clear()
        self._patterns = None
        self._subject_index = None

    @property
    def overlay(self) -> dict[tuple[str, str], str]:
        return dict(self._overlay)

    # -- prompt parsing ---------------------------------------------------

    def _relation_patterns(self) -> list[tuple[str, re.Pattern[str]]]:
        if self._patterns is None:
            relations = set(self._base.relations())
            relations.update(self._catalog.relations())
            relations.update(rel for (_, rel) in self._overlay)
            sentinel = "\x00subject\x00"
            patterns = []
            for relation in sorted(relations):
                prompt = build_query_prompt(self._catalog.get(relation), sentinel)
                regex = re.escape(prompt).replace(re.escape(sentinel), "(.+)")
                patterns.append((relation, re.compile(regex + r"\s*", re.IGNORECASE)))
            self._patterns = patterns
        return self._patterns

    def _known_subjects(self) -> dict[str, str]:
        """Casefolded name → canonical label, for aliases, labels, and ids."""
        if self._subject_index is None:
            index: dict[str, str] = {}
            for ident in self._base.entities():
                index.setdefault(ident.casefold(), ident)
            for ident, label in self._base.labels().items():
                index[label.casefold()] = label
            for (subject, _), _obj in self._overlay.items():
                index.setdefault(subject.casefold(), subject)
            for alias, canonical in self._aliases.items():
                index[alias.casefold()] = canonical
            self._subject_index = index
        return self._subject_index

    def _resolve_subject(self, text: str) -> str | None:
        name = " ".join(text.split())
        if not name:
            return None
        return self._known_subjects().get(name.casefold())

    @staticmethod
    def _unwrap(prompt: str) -> str:
        """Strip an in-prompt wrapper down to the sentence to complete."""
        marker = prompt.rfind(IN_PROMPT_MARKER)
        if marker >= 0:
            return prompt[marker + len(IN_PROMPT_MARKER):].strip()
        return prompt.strip()

    def parse_prompt(self, prompt: str) -> tuple[str, str] | None:
        """Return (canonical subject, relation) or None if unrecognized."""
        text = " ".join(self._unwrap(prompt).split())
        for relation, pattern in self._relation_patterns():
            match = pattern.fullmatch(text)
            if match is None:
                continue
            subject = self._resolve_subject(match.group(1))
            if subject is not None:
                return subject, relation
        return None

    # -- answering ---------------------------------------------------------

    def _base_answer(self, subject: str, relation: str) -> str | None:
        candidates = list(self._base.ids_for_label(subject))
        if not candidates and self._base.has_entity(subject):
            candidates = [subject]
        for ident in candidates:
            objects = self._base.objects_of(ident, relation)
            if objects:
                return self._base.label_of(objects[0])
        return None

    def query(self, prompt: str) -> str:
        parsed = self.parse_prompt(prompt)
        if parsed is None:
            return ""
        subject, relation = parsed
        overlaid = self._overlay.get((subject, relation))
        if overlaid is not None:
            return overlaid
        answer = self._base_answer(subject, relation)
        return answer if answer is not None else ""


class RemoteSubject:
    """Client for the HTTP subject protocol (POST /apply, /query, /revert).

    Each apply opens a session under a fresh run token; revert closes
    it.  Transport failures and non-200 responses surface as
    ProtocolError so the evaluation loop can mark the case errored.
    """

    def __init__(self, client, base_url: str = "", token_prefix: str | None = None) -> None:
        self._client = client
        self._base = base_url.rstrip("/")
        self._prefix = token_prefix or f"run-{uuid.uuid4().hex[:12]}"
        self._counter = 0
        self._active: str | None = None

    @classmethod
    def connect(cls, base_url: str, timeout: float = 60.0) -> "RemoteSubject":
        return cls(httpx.Client(timeout=timeout), base_url=base_url)

    def _post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(self._base + path, json=payload)
        except (httpx.HTTPError, OSError) as exc:
            raise ProtocolError(f"POST {path} failed: {exc}") from exc
        if response.status_code != 200:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text[:200]
            raise ProtocolError(f"POST {path} returned {response.status_code}: {detail}")
        try:
            doc = response.json()
        except ValueError as exc:
            raise ProtocolError(f"POST {path} returned a non-JSON body") from exc
        return doc if isinstance(doc, dict) else {}

    def apply_batch(self, batch: EditBatch) -> None:
        self._counter += 1
        token = f"{self._prefix}-{self._counter}"
        # Remember the token before the request goes out so a lost
        # response can still be cleaned up by revert().
        self._active = token
        self._post("/apply", {"run_token": token, "batch": batch_to_dict(batch)})

    def query(self, prompt: str) -> str:
        return str(self._post("/query", {"prompt": prompt}).get("text", ""))

    def revert(self) -> None:
        if self._active is None:
            return
        token, self._active = self._active, None
        self._post("/revert", {"run_token": token})
