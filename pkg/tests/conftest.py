import pytest

from divex.pipeline import build_snapshot, ingest, load_catalog, load_precomputed_featuremaps
from divex.service import ServiceConfig, create_app
from divex.synth import write_fixture_corpus

SOM_SEED = 7

# one line per acceptance criterion, echoed after the run summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool, details: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {details}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    return write_fixture_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def snapshot(corpus):
    return build_snapshot(corpus.manifest_path, corpus.score_paths)


@pytest.fixture(scope="session")
def catalog_dir(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("catalog")
    ingest(corpus.manifest_path, corpus.score_paths, str(out), seed=SOM_SEED, precompute_maps=True)
    return str(out)


@pytest.fixture(scope="session")
def served_snapshot(catalog_dir):
    return load_catalog(catalog_dir)


@pytest.fixture(scope="session")
def client(served_snapshot, catalog_dir):
    from fastapi.testclient import TestClient

    maps = load_precomputed_featuremaps(catalog_dir)
    app = create_app(served_snapshot, ServiceConfig(som_seed=SOM_SEED), maps)
    return TestClient(app)
