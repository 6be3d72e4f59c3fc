import pytest

from multipaxos.config import ModelConfig

DESK = dict(num_proposers=2, num_acceptors=3, max_ballot=2, max_slots=1, num_values=2)


@pytest.fixture
def tiny():
    return ModelConfig()


@pytest.fixture
def desk():
    return ModelConfig(**DESK)


@pytest.fixture
def desk_distinct():
    return ModelConfig(**DESK, initial_ballots="distinct")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
