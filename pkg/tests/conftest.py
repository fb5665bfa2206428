import time
from contextlib import contextmanager

import pytest

_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def criterion(request):
    """Times a block, enforces its budget and records one PASS/FAIL verdict line."""
    verdicts = request.config.stash[_VERDICTS]

    @contextmanager
    def run(number, title, budget_s):
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield
            elapsed = time.perf_counter() - start
            assert elapsed < budget_s, f"took {elapsed:.2f} s, budget {budget_s} s"
            status = "PASS"
        finally:
            elapsed = time.perf_counter() - start
            line = f"{status} criterion {number}: {title} ({elapsed:.2f} s of {budget_s} s)"
            verdicts.append(line)
            print(line)

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
