import pytest

from gkpsim.protocols import build_feedback_table, enumerate_outcomes


@pytest.fixture(scope="session")
def table8():
    return build_feedback_table(8)


@pytest.fixture(scope="session")
def adaptive8():
    return enumerate_outcomes("adaptive", 8)
