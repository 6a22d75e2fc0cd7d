"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion at the end of the run."""
import pytest

# criterion -> {part: (passed, detail)}
ACCEPTANCE: dict = {}

TITLES = {
    1: "Airy constants",
    2: "determinant claim on the full grid",
    3: "Airy-assembled vs spectral homogeneous solutions",
    4: "resolvent envelopes",
    5: "low-band unit-coefficient bound",
    6: "enhanced dissipation scaling",
    7: "homogeneous-split identities",
    8: "nonlinear stability property",
    9: "bilinear region kernels",
    10: "small-inequality oracle suite",
}


@pytest.fixture
def criterion():
    """criterion(n, part, passed, detail) records one part of acceptance criterion n and prints it."""

    def record(n: int, part: str, passed: bool, detail: str = ""):
        ACCEPTANCE.setdefault(n, {})[part] = (bool(passed), detail)
        print(f"criterion {n} [{part}]: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return record


def criterion_lines() -> list[str]:
    lines = []
    for n in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[n]
        ok = all(p for p, _ in parts.values())
        bad = [k for k, (p, _) in parts.items() if not p]
        tail = f" (failed: {', '.join(bad)})" if bad else ""
        lines.append(f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {TITLES.get(n, '')}{tail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = criterion_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
