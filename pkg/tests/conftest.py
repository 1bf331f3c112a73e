import pytest

from sfcluster.graph import Graph, from_edges


@pytest.fixture
def path4() -> Graph:
    return from_edges(4, [(1, 2), (2, 3), (3, 4)]).freeze()


@pytest.fixture
def star() -> Graph:
    return from_edges(6, [(1, k) for k in range(2, 7)]).freeze()


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion and assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
