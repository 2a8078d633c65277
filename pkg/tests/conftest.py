import math

import pytest


def within_binomial(count, trials, p, k=3.0):
    """|count - trials*p| <= k binomial sigmas (exact match required when sigma is 0)."""
    mean = trials * p
    sigma = math.sqrt(trials * p * (1 - p))
    return abs(count - mean) <= k * sigma + 1e-9


@pytest.fixture
def binom():
    return within_binomial


_ACCEPT = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """record(number, passed, detail) for the end-of-run criterion table."""
    store = request.config.stash.setdefault(_ACCEPT, {})

    def record(number, passed, detail=""):
        store[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPT, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        passed, detail = store[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
