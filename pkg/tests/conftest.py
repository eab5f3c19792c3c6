import pytest

from doomsday.io import bundled_fixture

# criterion id -> (text, passed so far); one summary line per id
_CRITERIA: dict[str, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        cid, text = marker.args
        prev = _CRITERIA.get(cid, (text, True))[1]
        _CRITERIA[cid] = (text, prev and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c.lstrip("AC"))):
        text, ok = _CRITERIA[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {text}")


@pytest.fixture
def fixture_path():
    return bundled_fixture
