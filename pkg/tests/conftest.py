import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    monkeypatch.setenv("RPYS_KIT_BACKEND", request.param)
    return request.param


@pytest.fixture(scope="session")
def planted():
    from rpyskit.synthetic import planted_fixture

    return planted_fixture()


@pytest.fixture(scope="session")
def planted_corpora(planted):
    """``(union corpus, {label: corpus})`` built in memory."""
    from rpyskit.wos import Corpus, union

    searches = {lab: Corpus(tuple(planted.search_records(lab))) for lab in planted.searches}
    return union(searches.values()), searches


@pytest.fixture(scope="session")
def planted_union_clusters(planted_corpora):
    from rpyskit.disambig import cluster_refs

    return cluster_refs(planted_corpora[0].cited_refs())


@pytest.fixture(scope="session")
def planted_matrix(planted_corpora, planted_union_clusters):
    from rpyskit.multi import build_matrix

    return build_matrix(planted_corpora[0], planted_union_clusters)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
