"""Shared fixtures: the two production noise models, built once per session.

Model construction is cached inside the library as well, so these fixtures
mostly serve as documentation of what the expensive objects are.
"""

from __future__ import annotations

import pytest

from lwe_channel.noise import build_noise_model
from lwe_channel.params import builtin


@pytest.fixture(scope="session")
def newhope_model():
    return build_noise_model(builtin("newhope1024"))


@pytest.fixture(scope="session")
def kyber_model():
    return build_noise_model(builtin("kyber1024"))


# One line per acceptance criterion, echoed at the end of the run so the
# PASS/FAIL verdicts survive pytest's output capture.
_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log() -> list[str]:
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
