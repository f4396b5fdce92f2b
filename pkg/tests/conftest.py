import numpy as np
import pytest

from extremal_lab import Grid, SpectralKernel, SystemSpec, assemble, continue_branch

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def record_criterion(request):
    """Store a PASS/FAIL line for an acceptance criterion (printed in the summary)."""
    table = request.config.stash[_ACCEPTANCE_KEY]

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        table[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_ACCEPTANCE_KEY, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(table):
        terminalreporter.write_line(table[k])


@pytest.fixture(scope="session")
def op_half_400():
    return assemble(SpectralKernel.fractional_laplacian(0.5), Grid(400))


@pytest.fixture(scope="session")
def op_half_200():
    return assemble(SpectralKernel.fractional_laplacian(0.5), Grid(200))


@pytest.fixture(scope="session")
def gelfand_branch_200(op_half_200):
    return continue_branch(op_half_200, SystemSpec.gelfand(), 1.0)


@pytest.fixture(scope="session")
def gelfand_branch_200_sigma2(op_half_200):
    return continue_branch(op_half_200, SystemSpec.gelfand(), 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
