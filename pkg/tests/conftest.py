from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# acceptance outcomes, printed in the terminal summary: (number, name, passed, detail)
ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_record():
    def record(number, name, passed, detail):
        line = f"ACCEPTANCE {number} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
        print(line)
        ACCEPTANCE.append((number, line))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
