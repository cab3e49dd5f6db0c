import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pmatmed import _kernels  # noqa: E402

KERNEL_PATHS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


@pytest.fixture(params=KERNEL_PATHS)
def kernel_path(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    monkeypatch.setattr(_kernels, "USE_NUMBA", request.param == "numba")
    return request.param


def pytest_terminal_summary(terminalreporter):
    import helpers
    if helpers.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in helpers.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
