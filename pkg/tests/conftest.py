import os

import pytest

_LINES = []


@pytest.fixture(autouse=True, scope="session")
def _cache_dir(tmp_path_factory):
    # keep Clifford tables and inverses out of the user cache
    if "SHALLOW_SHADOWS_CACHE" not in os.environ:
        os.environ["SHALLOW_SHADOWS_CACHE"] = str(tmp_path_factory.mktemp("cache"))
    yield


@pytest.fixture
def verdict():
    """verdict(number, ok, detail): record one acceptance line, then assert."""

    def _record(number, ok, detail):
        line = f"acceptance {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split(":")[0].split()[-1])):
            terminalreporter.write_line(line)
