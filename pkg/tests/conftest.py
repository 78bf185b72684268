import pytest

# criterion number -> list of (label, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, label: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[c]
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'}")
        for label, p, detail in parts:
            tr.write_line(f"    {'pass' if p else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(12345)
