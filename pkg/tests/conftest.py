from __future__ import annotations

import pytest

from codenudge.forge import FakeForge

ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one numbered acceptance criterion")


def pytest_runtest_logreport(report):
    number = getattr(report, "acceptance_number", None)
    if number is None:
        return
    entry = ACCEPTANCE.setdefault(number, {"title": report.acceptance_title, "failed": False, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed:
        entry["failed"] = True


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        report = outcome.get_result()
        report.acceptance_number = marker.args[0]
        report.acceptance_title = marker.args[1]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[number]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        terminalreporter.write_line(f"criterion {number}: {status}  {entry['title']}")


@pytest.fixture
def forge(tmp_path) -> FakeForge:
    return FakeForge(tmp_path / "forge", sleep=lambda _s: None)
