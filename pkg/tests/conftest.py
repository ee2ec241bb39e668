import pytest

from mrkit.corpus import bundled_dataset


@pytest.fixture(scope="session")
def dataset():
    return bundled_dataset()


@pytest.fixture(scope="session")
def sourced(dataset):
    return dataset.with_sources()


@pytest.fixture(scope="session")
def corpus_graphs(sourced):
    """name -> lowered AnnotatedCfg for every bundled mini-IR method."""
    return {e.name: sourced.load_cfg(e) for e in sourced.entries}


@pytest.fixture(scope="session")
def corpus_functions(sourced):
    return {e.name: sourced.load_function(e) for e in sourced.entries}
