"""Release gate for the adapter: the shared subject-protocol suite.

The suite lives in the producing toolkit and is the single source of
truth for apply/query/revert semantics and error codes; any edit
service that passes it can stand in as a subject model.  Here it runs
against the adapter service backed by the stub editing backend.
"""

from contextlib import contextmanager

from fastapi.testclient import TestClient

from chainedit.harness.protocol import FAMILY_TRIPLES, run_protocol_suite

from chainedit_adapter.backend import StubBackend
from chainedit_adapter.service import create_adapter_app


@contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except BaseException:
        print(f"criterion {number} ({name}): FAIL")
        raise
    print(f"criterion {number} ({name}): PASS")


def make_client() -> TestClient:
    return TestClient(create_adapter_app(StubBackend(FAMILY_TRIPLES)))


def test_criterion_10_adapter_passes_shared_protocol_suite():
    with criterion(10, "adapter protocol suite"):
        run_protocol_suite(make_client())


def test_suite_is_repeatable_against_one_service():
    client = make_client()
    run_protocol_suite(client)
    run_protocol_suite(client)
