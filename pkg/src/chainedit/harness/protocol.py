"""Shared conformance suite for the HTTP subject protocol.

Any service exposing POST /apply, /query, /revert can be checked with
run_protocol_suite: the built-in symbolic subject service passes it,
and external editor services are expected to pass the very same suite.
The client argument only needs a `post(url, json=...)` method returning
an object with `status_code` and `json()` — an httpx.Client pointed at
a live server and an in-process ASGI test client both qualify.
"""

from __future__ import annotations

import uuid

from ..batchfile import batch_to_dict
from ..engine import DerivedEdit, EditBatch, EditRequest, QueryRecord
from ..oracle.base import AnswerStatus
from ..store import Triple, TripleStore
from .scoring import score_answer

FAMILY_TRIPLES = (
    ("Alice", "father", "Bob"),
    ("Alice", "mother", "Rose"),
    ("Bob", "spouse", "Rose"),
    ("Carol", "spouse", "Mary"),
)

BASELINE_PROBES = (
    ("The father of Alice is", "Bob"),
    ("The mother of Alice is", "Rose"),
)

EDITED_PROBES = (
    ("The father of Alice is", "Carol"),
    ("The mother of Alice is", "Mary"),
)


def family_store() -> TripleStore:
    """Baseline knowledge shared by the suite's subject fixtures."""
    return TripleStore(Triple(*row) for row in FAMILY_TRIPLES)


def family_batch() -> EditBatch:
    """A two-line batch: the father edit plus its derived mother edit."""
    original = EditRequest("Alice", "father", "Carol")
    derived = DerivedEdit(
        subject="Alice",
        relation="mother",
        object="Mary",
        directive_id="father=>(S,mother,O.spouse)",
        queries=(
            QueryRecord(
                prompt="The spouse of Carol is",
                answer="Mary",
                status=AnswerStatus.ANSWERED.value,
            ),
        ),
    )
    return EditBatch(original=original, derived=(derived,), skipped=())


def _post(client, base_url: str, path: str, payload) -> object:
    return client.post(base_url.rstrip("/") + path, json=payload)


def _query(client, base_url: str, prompt: str) -> str:
    response = _post(client, base_url, "/query", {"prompt": prompt})
    assert response.status_code == 200, f"/query returned {response.status_code}"
    return str(response.json().get("text", ""))


def _assert_probes(client, base_url: str, probes, stage: str) -> None:
    for prompt, expected in probes:
        text = _query(client, base_url, prompt)
        assert score_answer(text, (expected,)), (
            f"{stage}: {prompt!r} answered {text!r}, expected {expected!r}"
        )


def run_protocol_suite(client, base_url: str = "") -> None:
    """Exercise apply/query/revert semantics and error codes end to end.

    Assumes the service was seeded with family_store() knowledge.  Uses
    fresh run tokens on every invocation so the suite can run repeatedly
    against the same long-lived service.
    """
    stamp = uuid.uuid4().hex[:8]
    token = f"suite-{stamp}-main"
    other = f"suite-{stamp}-other"
    batch = batch_to_dict(family_batch())

    # Pre-edit baseline.
    _assert_probes(client, base_url, BASELINE_PROBES, "baseline")

    # Malformed requests are 400s, not server errors.
    response = _post(client, base_url, "/apply", {"run_token": token, "batch": {"bogus": True}})
    assert response.status_code == 400, f"malformed batch: expected 400, got {response.status_code}"
    response = _post(client, base_url, "/apply", {"batch": batch})
    assert response.status_code == 400, f"missing token: expected 400, got {response.status_code}"
    response = _post(client, base_url, "/query", {})
    assert response.status_code == 400, f"missing prompt: expected 400, got {response.status_code}"

    # Apply and observe the edited state.
    response = _post(client, base_url, "/apply", {"run_token": token, "batch": batch})
    assert response.status_code == 200, f"apply: expected 200, got {response.status_code}"
    _assert_probes(client, base_url, EDITED_PROBES, "post-apply")

    # Idempotent re-apply under the same token.
    response = _post(client, base_url, "/apply", {"run_token": token, "batch": batch})
    assert response.status_code == 200, f"re-apply: expected 200, got {response.status_code}"
    _assert_probes(client, base_url, EDITED_PROBES, "re-apply")

    # A different token cannot open a second concurrent session.
    response = _post(client, base_url, "/apply", {"run_token": other, "batch": batch})
    assert response.status_code == 409, f"second session: expected 409, got {response.status_code}"

    # Revert requires the owning token.
    response = _post(client, base_url, "/revert", {"run_token": other})
    assert response.status_code == 409, f"foreign revert: expected 409, got {response.status_code}"

    # Revert restores the baseline.
    response = _post(client, base_url, "/revert", {"run_token": token})
    assert response.status_code == 200, f"revert: expected 200, got {response.status_code}"
    _assert_probes(client, base_url, BASELINE_PROBES, "post-revert")

    # Idempotent re-revert under the same token.
    response = _post(client, base_url, "/revert", {"run_token": token})
    assert response.status_code == 200, f"re-revert: expected 200, got {response.status_code}"

    # A reverted token cannot be reused for a new session.
    response = _post(client, base_url, "/apply", {"run_token": token, "batch": batch})
    assert response.status_code == 409, f"token reuse: expected 409, got {response.status_code}"

    # The service stays usable for a fresh session afterwards.
    fresh = f"suite-{stamp}-fresh"
    response = _post(client, base_url, "/apply", {"run_token": fresh, "batch": batch})
    assert response.status_code == 200, f"fresh apply: expected 200, got {response.status_code}"
    _assert_probes(client, base_url, EDITED_PROBES, "fresh session")
    response = _post(client, base_url, "/revert", {"run_token": fresh})
    assert response.status_code == 200, f"fresh revert: expected 200, got {response.status_code}"
    _assert_probes(client, base_url, BASELINE_PROBES, "final baseline")
