"""URI schemes selecting oracle, judge, and subject backends.

One string flag covers both fixture-backed and live backends:

- oracle:  `mock:<triples.tsv>[,<labels.tsv>]` or `http(s)://...`
- judge:   `table:<table.json>` or `http(s)://...`
- subject: `symbolic:<triples.tsv>[,<labels.tsv>][,<aliases.json>]`
           or `http(s)://...`
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import ChainEditError
from .harness.subject import RemoteSubject, SubjectModel, SymbolicSubject
from .meta import RelationCatalog
from .oracle.client import AUTH_TOKEN_ENV, ChatOracle, OracleConfig
from .oracle.mock import StoreOracle, TableJudge
from .store import ingest


def _split_paths(rest: str, most: int) -> list[str | None]:
    parts = [p.strip() or None for p in rest.split(",")]
    if not parts or parts[0] is None:
        raise ChainEditError(f"URI needs at least one path, got {rest!r}")
    if len(parts) > most:
        raise ChainEditError(f"URI takes at most {most} comma-separated paths, got {rest!r}")
    parts += [None] * (most - len(parts))
    return parts


def _chat_oracle(endpoint: str, options: dict | None) -> ChatOracle:
    options = dict(options or {})
    options.setdefault("auth_token", os.environ.get(AUTH_TOKEN_ENV))
    return ChatOracle(OracleConfig(endpoint=endpoint, **options))


def resolve_oracle(uri: str, options: dict | None = None):
    """Build a knowledge oracle from its URI."""
    if uri.startswith("mock:"):
        triples, labels = _split_paths(uri[len("mock:"):], 2)
        return StoreOracle(ingest(triples, labels))
    if uri.startswith(("http://", "https://")):
        return _chat_oracle(uri, options)
    raise ChainEditError(f"unsupported oracle URI {uri!r} (use mock: or http(s)://)")


def resolve_judge(uri: str, options: dict | None = None):
    """Build a rule judge from its URI."""
    if uri.startswith("table:"):
        (path,) = _split_paths(uri[len("table:"):], 1)
        return TableJudge.from_file(path)
    if uri.startswith(("http://", "https://")):
        return _chat_oracle(uri, options)
    raise ChainEditError(f"unsupported judge URI {uri!r} (use table: or http(s)://)")


def load_aliases(path: str | Path) -> dict[str, str]:
    """JSON alias map: {"aliases": {alias: canonical, ...}} or a bare object."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ChainEditError(f"cannot read alias map {path}: {exc}") from exc
    if isinstance(doc, dict) and isinstance(doc.get("aliases"), dict):
        doc = doc["aliases"]
    if not isinstance(doc, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in doc.items()
    ):
        raise ChainEditError(f"{path}: expected a string-to-string alias mapping")
    return dict(doc)


def resolve_subject(uri: str, catalog: RelationCatalog | None = None) -> SubjectModel:
    """Build a subject model from its URI."""
    if uri.startswith("symbolic:"):
        triples, labels, aliases_path = _split_paths(uri[len("symbolic:"):], 3)
        store = ingest(triples, labels)
        aliases = load_aliases(aliases_path) if aliases_path else {}
        return SymbolicSubject(
            store, catalog or RelationCatalog(fallback_label=store.label_of), aliases
        )
    if uri.startswith(("http://", "https://")):
        return RemoteSubject.connect(uri)
    raise ChainEditError(f"unsupported subject URI {uri!r} (use symbolic: or http(s)://)")
