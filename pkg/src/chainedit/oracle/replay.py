"""Record/replay transports so live-oracle runs can be replayed offline.

Fixture format: JSON lines of {"request_hash": ..., "response_text": ...}.
The hash covers the canonical JSON of the full request body (model,
messages, temperature), so replays are exact.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

import httpx

from ..errors import ReportError


def request_hash(body: dict) -> str:
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_fixture(path: str | Path) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                table[row["request_hash"]] = row["response_text"]
            except (ValueError, KeyError, TypeError) as exc:
                raise ReportError(f"{path}:{lineno}: bad replay row: {exc}") from exc
    return table


class ReplayTransport(httpx.BaseTransport):
    """Serves recorded completions; unknown requests get a 404."""

    def __init__(self, fixture_path: str | Path) -> None:
        self._table = load_fixture(fixture_path)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        try:
            body = json.loads(request.content)
        except ValueError:
            return httpx.Response(400, json={"error": "request body is not JSON"})
        text = self._table.get(request_hash(body))
        if text is None:
            return httpx.Response(404, json={"error": "no recorded response for this request"})
        return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


class RecordingTransport(httpx.BaseTransport):
    """Wraps a real transport and appends replay rows for each success."""

    def __init__(self, inner: httpx.BaseTransport, out_path: str | Path) -> None:
        self._inner = inner
        self._out_path = Path(out_path)
        self._lock = threading.Lock()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        response = self._inner.handle_request(request)
        if response.status_code == 200:
            response.read()
            try:
                content = response.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                return response
            row = {
                "request_hash": request_hash(json.loads(request.content)),
                "response_text": content,
            }
            with self._lock, open(self._out_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
                fh.flush()
        return response
