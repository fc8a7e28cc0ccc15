"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import re

CRITERIA = {
    1: "Kamke ODE 120 verification of the four generator pairs (< 5 s)",
    2: "Kamke ODE 120 discovery with basis hints (< 10 s each)",
    3: "damped oscillator: default ansatz and exponential hint, all verified (< 30 s)",
    4: "Kepler problem: split generators span exactly the three expected sets (< 60 s)",
    5: "property suite over the linear corpus and 1000 random trees (< 2 min)",
    6: "oracle equivalence against brute-force degree-1 enumeration, 20 instances",
}
_results = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        ok = _results.get(k, True) and report.outcome == "passed"
        _results[k] = ok


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k in _results:
            verdict = "PASS" if _results[k] else "FAIL"
            terminalreporter.write_line(f"criterion {k}: {verdict}  {CRITERIA[k]}")
