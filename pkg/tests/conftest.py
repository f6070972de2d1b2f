import numpy as np
import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, text): acceptance criterion covered by the test")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    ok = report.outcome == "passed"
    prev = _CRITERIA.get(crit, (True, []))
    _CRITERIA[crit] = (prev[0] and ok, prev[1] + [(report.nodeid.split("::")[-1], ok)])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = (str(mark.args[0]), mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for (num, text), (ok, parts) in sorted(_CRITERIA.items(), key=lambda kv: int(kv[0][0])):
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {text}")
        for name, part_ok in parts:
            tr.write_line(f"        {'pass' if part_ok else 'FAIL'}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
