"""Run manifests: content hashes of inputs and outputs plus the config.

Manifests deliberately carry no timestamps so identical runs produce
byte-identical manifest files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping

from . import __version__


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _hash_entries(paths: Mapping[str, str | Path | None]) -> dict:
    entries = {}
    for role, path in paths.items():
        if path is None:
            continue
        entries[role] = {"path": str(path), "sha256": sha256_file(path)}
    return entries


def build_manifest(
    command: str,
    config: Mapping | None = None,
    inputs: Mapping[str, str | Path | None] | None = None,
    outputs: Mapping[str, str | Path | None] | None = None,
    extra: Mapping | None = None,
) -> dict:
    """Assemble the manifest for one run: versions, config, file hashes."""
    manifest = {
        "command": command,
        "package": {"name": "chainedit", "version": __version__},
        "config": dict(config or {}),
        "inputs": _hash_entries(inputs or {}),
        "outputs": _hash_entries(outputs or {}),
    }
    if extra:
        manifest["extra"] = dict(extra)
    return manifest


def save_manifest(manifest: Mapping, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
