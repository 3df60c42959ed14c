import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def symmetric(draw, max_n=6, values=(-2, -1, 0, 1, 2), min_n=0):
    n = draw(st.integers(min_n, max_n))
    upper = draw(st.lists(st.sampled_from(values), min_size=n * (n + 1) // 2,
                          max_size=n * (n + 1) // 2))
    A = np.zeros((n, n), dtype=np.int64)
    A[np.triu_indices(n)] = upper
    A = np.triu(A) + np.triu(A, 1).T
    return A.tolist()


@st.composite
def integer_matrix(draw, max_rows=5, max_cols=5, values=(-3, -1, 0, 1, 2)):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    return [draw(st.lists(st.sampled_from(values), min_size=n, max_size=n)) for _ in range(m)]


# Acceptance verdicts, echoed in the terminal summary whatever the capture mode.
VERDICTS: dict[int, str] = {}


def verdict(number: int, ok: bool, detail: str):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS[number] = line
    print(line)
    assert ok, line


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    rep = outcome.get_result()
    if mark and rep.when == "call" and rep.failed and mark.args[0] not in VERDICTS:
        VERDICTS[mark.args[0]] = f"criterion {mark.args[0]:>2}: FAIL  error before a verdict: {call.excinfo.typename}"


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[k])
