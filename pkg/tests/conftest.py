import re

_CRITERIA = {
    1: "measure correctness (scalar fixtures)",
    2: "measure property suite",
    3: "estimator/oracle convergence",
    4: "front-end checks",
    5: "duration grid monotone trend",
    6: "duration asymmetry direction",
    7: "phonetic protocol integrity",
    8: "metrics fixtures",
    9: "report determinism",
}

_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            match = _PATTERN.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            number = int(match.group(1))
            if status != "passed" or report.when == "call":
                outcomes.setdefault(number, status)
            if status != "passed":
                outcomes[number] = status
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(outcomes):
        verdict = "PASS" if outcomes[number] == "passed" else "FAIL"
        label = _CRITERIA.get(number, "")
        terminalreporter.write_line(f"criterion {number}: {verdict} - {label}")
