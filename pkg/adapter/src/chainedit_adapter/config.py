"""Service configuration: which model, device, and editing method to run.

The config file is TOML:

    [model]
    name = "my-model-8b"
    device = "cuda:0"

    [editing]
    method = "stub"

    [editing.hyperparameters]
    layers = [4, 5, 6]
    lr = 5e-4

Hyperparameters are passed through to the backend untouched; each
editing method defines its own set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib


class ConfigError(ValueError):
    """The adapter config file is unreadable or malformed."""


@dataclass(frozen=True)
class AdapterConfig:
    model: str = "stub"
    device: str = "cpu"
    method: str = "stub"
    hyperparameters: dict = field(default_factory=dict)


def _table(doc: dict, key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section [{key}] must be a table")
    return value


def load_config(path: str | Path) -> AdapterConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read adapter config {path}: {exc}") from exc
    model = _table(doc, "model")
    editing = _table(doc, "editing")
    hyper = editing.get("hyperparameters", {})
    if not isinstance(hyper, dict):
        raise ConfigError("config section [editing.hyperparameters] must be a table")
    return AdapterConfig(
        model=str(model.get("name", "stub")),
        device=str(model.get("device", "cpu")),
        method=str(editing.get("method", "stub")),
        hyperparameters=dict(hyper),
    )
