"""Command line entry point: load config, build a backend, serve HTTP."""

from __future__ import annotations

import argparse
import sys
from typing import Callable

from .backend import StubBackend
from .config import AdapterConfig, ConfigError, load_config
from .service import create_adapter_app

_METHODS = ("stub",)


def _load_facts(path: str) -> list[tuple[str, str, str]]:
    facts = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ConfigError(f"{path}:{lineno}: expected 3 tab-separated fields")
                facts.append((parts[0], parts[1], parts[2]))
    except OSError as exc:
        raise ConfigError(f"cannot read facts file {path}: {exc}") from exc
    return facts


def build_backend(config: AdapterConfig) -> StubBackend:
    if config.method != "stub":
        raise ConfigError(
            f"unknown editing method {config.method!r}; available: {', '.join(_METHODS)}"
        )
    facts_path = config.hyperparameters.get("facts")
    facts = _load_facts(str(facts_path)) if facts_path else []
    return StubBackend(facts)


def main(argv: list[str] | None = None, runner: Callable | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="chainedit-adapter",
        description="Serve a subject model's apply/query/revert interface",
    )
    parser.add_argument("--config", help="TOML config file (model, device, editing method)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8801)
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config) if args.config else AdapterConfig()
        backend = build_backend(config)
    except ConfigError as exc:
        print(f"error (ConfigError): {exc}", file=sys.stderr)
        return 1

    app = create_adapter_app(backend, config)
    if runner is None:  # pragma: no cover - exercised only by a live server
        import uvicorn

        runner = uvicorn.run
    runner(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
