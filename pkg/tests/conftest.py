import pytest

from driftparse.corpus import GeneratorConfig, generate_corpus
from driftparse.pipeline import preprocess_corpus, train


def pytest_terminal_summary(terminalreporter):
    """Echo the per-criterion verdicts collected by the acceptance suite."""
    from . import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.VERDICTS:
            terminalreporter.write_line(line)

A_SEED = 42
B_SEED = 7
N_EVENTS = 1000


@pytest.fixture(scope="session")
def corpus_a():
    return generate_corpus(GeneratorConfig(seed=A_SEED, n_events=N_EVENTS))


@pytest.fixture(scope="session")
def corpus_b():
    return generate_corpus(
        GeneratorConfig(seed=B_SEED, n_events=N_EVENTS, drift_profile="system_b")
    )


@pytest.fixture(scope="session")
def bundle_a(corpus_a):
    records, truth = corpus_a
    return train(records, truth)


@pytest.fixture(scope="session")
def lines_a(corpus_a):
    return preprocess_corpus(corpus_a[0])


@pytest.fixture(scope="session")
def lines_b(corpus_b):
    return preprocess_corpus(corpus_b[0])
