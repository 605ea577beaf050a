"""Collects acceptance results and prints one line per criterion at the end of the run."""

import pytest

_RESULTS: list[tuple[str, str, str]] = []


class Report:
    def __init__(self, name: str):
        self.name = name
        self.checks: list[tuple[str, bool]] = []

    def check(self, label: str, ok: bool) -> bool:
        self.checks.append((label, bool(ok)))
        return bool(ok)

    def info(self, text: str) -> None:
        _RESULTS.append(("INFO", self.name, text))

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(ok for _, ok in self.checks)

    def finish(self) -> None:
        failed = [label for label, ok in self.checks if not ok]
        detail = "; ".join(label for label, _ in self.checks)
        status = "PASS" if self.ok else "FAIL"
        if failed:
            detail += "  || failing: " + "; ".join(failed)
        _RESULTS.append((status, self.name, detail))
        assert self.ok, f"{self.name}: failing checks: {failed}"


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    return Report(marker.args[0] if marker else request.node.name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance")
    for status, name, detail in _RESULTS:
        if status != "INFO":
            tr.write_line(f"{status}  {name}: {detail}")
    infos = [(name, detail) for status, name, detail in _RESULTS if status == "INFO"]
    if infos:
        tr.section("acceptance diagnostics")
        for name, detail in infos:
            tr.write_line(f"info  {name}: {detail}")
