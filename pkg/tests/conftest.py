from pathlib import Path

import pytest

from lamcl.syntax import parse_source

ROOT = Path(__file__).resolve().parents[1]
CORPUS_DIR = ROOT / "corpus"
DATA_DIR = Path(__file__).resolve().parent / "data"
CORPUS_FILES = sorted(CORPUS_DIR.glob("*.lamcl"))


def load_source(path):
    path = Path(path)
    return parse_source(path.read_text(), name=path.name)


def source(text):
    return parse_source(text)


@pytest.fixture(params=CORPUS_FILES, ids=lambda p: p.stem)
def corpus_entry(request):
    return load_source(request.param)


# acceptance bookkeeping: nodeid -> (number, title), number -> outcome
_ITEMS: dict[str, tuple] = {}
_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    item = _ITEMS.get(report.nodeid)
    if item is None:
        return
    number, title = item
    results = _RESULTS.setdefault(number, {"title": title, "ok": True, "seen": False})
    if report.when == "call" or report.outcome != "passed":
        results["seen"] = True
        results["ok"] &= report.outcome == "passed"


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _ITEMS[item.nodeid] = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        r = _RESULTS[number]
        if r["seen"]:
            terminalreporter.write_line(f"criterion {number}: {'PASS' if r['ok'] else 'FAIL'}  {r['title']}")

