import pytest
from hypothesis import settings

# reproducible examples; numba compilation makes first calls slow
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

_ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def record():
    """Register the outcome of an acceptance criterion for the summary."""

    def _record(number: int, ok: bool, detail: str):
        _ACCEPTANCE.append((number, bool(ok), detail))
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
