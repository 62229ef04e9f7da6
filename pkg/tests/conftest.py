import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture
def grid():
    return np.linspace(0.0, 100.0, 1001)


def pytest_configure(config):
    config.acceptance_lines = []
    config.addinivalue_line("markers", "acceptance: acceptance criteria (long running)")


@pytest.fixture
def record(request):
    """Store one pass/fail line per criterion for the terminal summary."""

    def _record(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}"
        print(line)
        request.config.acceptance_lines.append(line)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(config.acceptance_lines):
            terminalreporter.write_line(line)
