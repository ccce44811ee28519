import pytest

from mushybench import VT3_1, fdm, similarity
from mushybench.linearization import solve_mushy_diffusivity

# (criterion id, description, passed, detail) collected by test_acceptance
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def vt31():
    return VT3_1


@pytest.fixture(scope="session")
def lin(vt31):
    return solve_mushy_diffusivity(vt31)


@pytest.fixture(scope="session")
def model(lin):
    return lin.model


@pytest.fixture(scope="session")
def sol(vt31, lin):
    return similarity.solve_exact(vt31, 800.0, 1650.0, lin)


@pytest.fixture(scope="session")
def benchmark_run(vt31, model):
    """Benchmark grid: d = 0.5 m, N = 500, tau = 0.1 s, up to 500 s."""
    grid = fdm.GridSpec(0.5, 500, 0.1, 500.0, (20.0, 100.0, 300.0, 500.0))
    return fdm.run(vt31, model, grid, 800.0, 1650.0)


@pytest.fixture(scope="session")
def refined_run(vt31, model):
    grid = fdm.GridSpec(0.5, 1000, 0.05, 500.0, (20.0, 100.0, 300.0, 500.0))
    return fdm.run(vt31, model, grid, 800.0, 1650.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid:>2}. {text}: {detail}")
