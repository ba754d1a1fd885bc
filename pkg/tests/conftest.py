import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"


def read_corpus(kind: str) -> dict[str, str]:
    """All .dkg programs under fixtures/corpus/<kind>, keyed by filename."""
    return {
        p.name: p.read_text(encoding="utf-8")
        for p in sorted((CORPUS / kind).glob("*.dkg"))
    }


@pytest.fixture(scope="session")
def valid_programs() -> dict[str, str]:
    return read_corpus("valid")


@pytest.fixture(scope="session")
def seeded_programs() -> dict[str, str]:
    return read_corpus("seeded")


@pytest.fixture(scope="session")
def fixed_programs() -> dict[str, str]:
    return read_corpus("fixed")


@pytest.fixture(scope="session")
def seeded_manifest() -> dict[str, dict]:
    return json.loads((CORPUS / "seeded" / "manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def nli_dir() -> Path:
    return FIXTURES / "nli"


@pytest.fixture(scope="session")
def demo_store_path() -> Path:
    return FIXTURES / "demo_store.jsonl"
