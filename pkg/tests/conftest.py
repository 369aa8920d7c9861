"""Collects acceptance results and prints one line per criterion."""

import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the current acceptance test."""

    def record(text: str) -> None:
        request.node.criterion_detail = text
        print(text)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    _RESULTS[number] = (title, rep.passed, getattr(item, "criterion_detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, text = _RESULTS[number]
        status = "PASS" if passed else "FAIL"
        suffix = f": {text}" if text else ""
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}{suffix}")
