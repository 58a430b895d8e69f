from __future__ import annotations

import pytest

from datemin import Store, seeded_ids

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _CRITERIA.append((str(number), f"{title} [{item.name}]", report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(_CRITERIA, key=lambda c: (int(c[0].split(".")[0]), c[0])):
        terminalreporter.write_line(f"criterion {number}: {outcome} - {title}")


@pytest.fixture
def store() -> Store:
    return Store(id_factory=seeded_ids(1234))
