import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from andmalkg import (
    FetchSelector,
    FixtureSource,
    Graph,
    build_schema,
    fetch_reports,
    ingest_corpus,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
QUERIES = ROOT / "queries"


@pytest.fixture(scope="session")
def registry():
    return build_schema()


@pytest.fixture(scope="session")
def manifest():
    return json.loads((FIXTURES / "manifest.json").read_text(encoding="utf-8"))


def load_reports(corpus: str):
    errors: list[tuple[str, str]] = []
    reports = fetch_reports(
        FetchSelector.recent(1000), FixtureSource(FIXTURES / corpus), errors
    )
    assert not errors, f"fixture corpus {corpus} has invalid files: {errors}"
    return reports


@pytest.fixture(scope="session")
def table1_reports():
    return load_reports("table1")


@pytest.fixture(scope="session")
def multifam_reports():
    return load_reports("multifam")


def build_graph(reports, registry):
    graph = Graph()
    summary = ingest_corpus(reports, registry, graph)
    assert not summary.violations
    return graph


@pytest.fixture(scope="session")
def table1_graph(table1_reports, registry):
    return build_graph(table1_reports, registry)


@pytest.fixture(scope="session")
def multifam_graph(multifam_reports, registry):
    return build_graph(multifam_reports, registry)


@pytest.fixture(scope="session")
def query_text():
    def load(name: str) -> str:
        return (QUERIES / f"{name}.rq").read_text(encoding="utf-8")

    return load
