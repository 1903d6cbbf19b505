"""Editing backends: the pluggable layer that actually mutates a model.

A backend receives the flat list of edit triples from a batch, applies
them to whatever it manages (model weights, an in-memory table), and
returns an opaque delta object.  Passing that delta back to revert()
must restore the pre-edit state.  Real weight-editing backends should
return the per-method weight deltas they computed, or a reference to a
full pre-edit checkpoint as a fallback; the stub returns the list of
overwritten facts.
"""

from __future__ import annotations

import re
from typing import Iterable, Protocol

from .wire import EditTriple


class EditingFailure(RuntimeError):
    """The backend could not apply or revert an edit."""


class EditingBackend(Protocol):
    def apply_edits(self, edits: Iterable[EditTriple]) -> object: ...

    def revert(self, delta: object) -> None: ...

    def generate(self, prompt: str) -> str: ...


_PROMPT = re.compile(r"the\s+(?P<relation>.+?)\s+of\s+(?P<subject>.+?)\s+is", re.IGNORECASE)


class StubBackend:
    """In-memory fact table standing in for an editable language model.

    Facts are keyed by (subject, relation) with the relation matched
    case-insensitively.  generate() only understands prompts of the
    form "The <relation> of <subject> is"; anything else completes to
    an empty string, which scores as a wrong answer.
    """

    def __init__(self, facts: Iterable[tuple[str, str, str]] = ()) -> None:
        self._facts: dict[tuple[str, str], str] = {}
        for subject, relation, obj in facts:
            self._facts[(subject, relation.lower())] = obj

    def apply_edits(self, edits: Iterable[EditTriple]) -> object:
        delta = []
        for edit in edits:
            key = (edit.subject, edit.relation.lower())
            delta.append((key, self._facts.get(key)))
            self._facts[key] = edit.object
        return delta

    def revert(self, delta: object) -> None:
        if not isinstance(delta, list):
            raise EditingFailure(f"unusable revert delta: {type(delta).__name__}")
        for key, prior in reversed(delta):
            if prior is None:
                self._facts.pop(key, None)
            else:
                self._facts[key] = prior

    def generate(self, prompt: str) -> str:
        match = _PROMPT.fullmatch(prompt.strip().rstrip("?."))
        if match is None:
            return ""
        key = (match.group("subject"), match.group("relation").lower())
        return self._facts.get(key, "")
