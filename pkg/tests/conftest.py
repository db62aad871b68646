import pytest

from cuesim import FeatureLayout

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def layout():
    return FeatureLayout()


def gbit(layout, i):
    """Bit for general feature ``i`` (0-based within the general region)."""
    return 1 << (layout.general_start + i)


def gbits(layout, *idx):
    out = 0
    for i in idx:
        out |= gbit(layout, i)
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
