import pytest

from coilcoupler.config import load_preset
from coilcoupler.sweep import run_sweep

# criterion id -> (passed, detail), filled in by test_acceptance
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def twocoil():
    return load_preset("twocoil")


@pytest.fixture(scope="session")
def threecoil():
    return load_preset("threecoil")


@pytest.fixture(scope="session")
def twocoil_field(twocoil):
    """The default 17 x 13 two-coil X/Z sweep."""
    return run_sweep(twocoil.coils, twocoil.sweep, twocoil.solver)


@pytest.fixture(scope="session")
def threecoil_field(threecoil):
    return run_sweep(threecoil.coils, threecoil.sweep, threecoil.solver)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
