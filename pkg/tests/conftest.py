import contextlib

import pytest

_ACCEPTANCE = []


class AcceptanceRecorder:
    """Records one PASS/FAIL line per acceptance criterion."""

    @contextlib.contextmanager
    def check(self, number, title):
        detail = {}
        try:
            yield detail
        except BaseException as exc:
            _ACCEPTANCE.append((number, title, False, detail.get("note") or type(exc).__name__))
            print(f"\n[FAIL] criterion {number}: {title}")
            raise
        _ACCEPTANCE.append((number, title, True, detail.get("note", "")))
        print(f"\n[PASS] criterion {number}: {title} {detail.get('note', '')}".rstrip())


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, note in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {number}. {title}"
        if note:
            line += f"  ({note})"
        terminalreporter.write_line(line)
