"""Per-criterion pass/fail summary for the acceptance tests.

Tests tagged ``@pytest.mark.criterion(n)`` are grouped by ``n``. A criterion
passes when every tagged test ran and passed. Measured values recorded with
``record_property("detail", ...)`` are echoed next to the verdict.
"""

import pytest

CRITERIA = {
    1: "matrix operator invariants",
    2: "projection oracles",
    3: "schedule and ratio runtime checks",
    4: "dual gap implies small exploitability",
    5: "rate trend on matrix games",
    6: "EFG reduction and trend",
    7: "diagnostic consistency on logged rows",
    8: "fit_rate exactness",
    9: "determinism",
}

_outcomes = {}
_details = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(n, []).append(report.outcome)
        for key, value in report.user_properties:
            if key == "detail":
                _details.setdefault(n, []).append(str(value))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            verdict = "NOT RUN"
        elif all(r == "passed" for r in results):
            verdict = "PASS"
        else:
            verdict = "FAIL"
        line = f"criterion {n}: {verdict}  {name}"
        if n in _details:
            line += "  [" + "; ".join(_details[n]) + "]"
        terminalreporter.write_line(line)
