from pathlib import Path

import pytest

from chainedit.directives import RuleSet
from chainedit.meta import RelationCatalog
from chainedit.store import ingest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def family_dir() -> Path:
    return FIXTURES / "family"


@pytest.fixture
def family_store():
    return ingest(FIXTURES / "family" / "kb.tsv")


@pytest.fixture
def family_oracle_store():
    return ingest(FIXTURES / "family" / "oracle_kb.tsv")


@pytest.fixture
def family_catalog():
    return RelationCatalog.from_file(FIXTURES / "family" / "relations.json")


@pytest.fixture
def family_rules():
    return RuleSet.load(FIXTURES / "family" / "rules.json")
