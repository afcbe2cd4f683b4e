import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(cid, title): acceptance criterion this test belongs to"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid, title = marker.args
    entry = _CRITERIA.setdefault(cid, {"title": title, "passed": True, "failures": []})
    if report.failed:
        entry["passed"] = False
        entry["failures"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[2:])):
        entry = _CRITERIA[cid]
        status = "PASS" if entry["passed"] else "FAIL"
        line = f"{cid} {status}  {entry['title']}"
        if entry["failures"]:
            line += f"  [failed: {', '.join(entry['failures'])}]"
        terminalreporter.write_line(line)
