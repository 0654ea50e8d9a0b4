"""Prints one PASS/FAIL line per acceptance criterion after the run."""

import re

import pytest

_details = {}
_outcomes = {}
_CRITERION = re.compile(r"test_criterion_(\d+)_")


@pytest.fixture
def report(request):
    """Collects detail lines shown next to the criterion's verdict."""
    lines = _details.setdefault(request.node.nodeid, [])
    return lines.append


def pytest_runtest_logreport(report):
    if not _CRITERION.search(report.nodeid):
        return
    if report.when == "call" or report.failed:
        prev = _outcomes.get(report.nodeid, "passed")
        _outcomes[report.nodeid] = "failed" if report.failed or prev == "failed" else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for nodeid in sorted(_outcomes, key=lambda k: int(_CRITERION.search(k).group(1))):
        num = _CRITERION.search(nodeid).group(1)
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(_outcomes[nodeid], _outcomes[nodeid].upper())
        name = nodeid.split("::")[-1][len(f"test_criterion_{num}_"):].replace("_", " ")
        tr.write_line(f"criterion {num}: {verdict}  ({name})")
        for line in _details.get(nodeid, []):
            tr.write_line(f"    {line}")
