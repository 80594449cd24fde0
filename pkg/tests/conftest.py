import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record ``criterion N: PASS|FAIL`` for the terminal summary, whatever the test outcome."""
    state = {}

    def record(number, title, detail=""):
        state.update(number=number, title=title, detail=detail)

    yield record, state
    ok = state.get("ok", False)
    line = f"criterion {state['number']:>2}: {'PASS' if ok else 'FAIL'}  {state['title']}"
    if state.get("detail"):
        line += f"  ({state['detail']})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
