import pytest

CRITERIA = {
    1: "fixed points are exact",
    2: "circulant outcome table",
    3: "geometric graph outcome trend",
    4: "decision rule matches contribution probability",
    5: "catastrophe ratio sanity",
    6: "degree and final belief anticorrelated",
    7: "metastable plateau exists",
    8: "byte-identical batch output",
    9: "helper formulas",
    10: "graph oracles",
}

_items = {}
_results = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _items[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _items.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed"
        _results[n] = _results.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _items:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        if n not in set(_items.values()):
            continue
        state = _results.get(n)
        word = "NOT RUN" if state is None else ("PASS" if state else "FAIL")
        terminalreporter.write_line(f"criterion {n:2d} {word:7s} {name}")


@pytest.fixture
def criterion_log(capsys):
    def log(msg):
        with capsys.disabled():
            print(msg)

    return log
