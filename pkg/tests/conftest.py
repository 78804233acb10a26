import numpy as np
import pytest

from jetad.corpus import CorpusConfig, generate, worked_example

# criterion number -> (ok, detail), filled in by test_acceptance
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def corpus():
    return list(generate(CorpusConfig(size=200, seed=0)))


@pytest.fixture
def worked():
    return worked_example()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
