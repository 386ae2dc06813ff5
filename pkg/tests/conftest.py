import re

_CRITERIA: dict[int, tuple[str, str]] = {}
_PATTERN = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[n] = (report.outcome.upper(), m.group(2).replace("_", " "))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        outcome, name = _CRITERIA[n]
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {name}")
