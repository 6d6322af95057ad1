import time
from contextlib import contextmanager
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
DEMOS = ROOT / "demos"

_criteria = {}


@pytest.fixture
def criterion():
    """Record pass/fail and wall time of an acceptance criterion."""

    @contextmanager
    def run(number, title):
        # parametrized criteria pass only if every instance passes
        t0 = time.perf_counter()
        prev = _criteria.get(number)
        info = {"title": title, "ok": False, "secs": 0.0, "detail": "", "runs": 1}
        _criteria[number] = info
        try:
            yield info
            info["ok"] = prev is None or prev["ok"]
        finally:
            info["secs"] = time.perf_counter() - t0
            if prev is not None:
                info["secs"] += prev["secs"]
                info["runs"] += prev["runs"]

    return run


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        c = _criteria[n]
        detail = c["detail"] or (f"{c['runs']} instances" if c["runs"] > 1 else "")
        detail = f" ({detail})" if detail else ""
        terminalreporter.write_line(
            f"criterion {n:2d}: {'PASS' if c['ok'] else 'FAIL'}  {c['secs']:7.2f}s  {c['title']}{detail}"
        )
