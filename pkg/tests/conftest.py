import re

from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_results: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    entry = _results.setdefault(num, {"name": m.group(2).replace("_", " "), "outcome": "passed", "duration": 0.0})
    entry["duration"] += report.duration
    if report.failed:
        entry["outcome"] = "failed"
    elif report.skipped and entry["outcome"] == "passed":
        entry["outcome"] = "skipped"


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        r = _results[num]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[r["outcome"]]
        terminalreporter.write_line(f"criterion {num:2d} {status}  {r['name']} ({r['duration']:.2f} s)")
