import numpy as np
import pytest

from viscodg.assembly import assemble_system
from viscodg.manufactured import ManufacturedCase
from viscodg.mesh import build_structured_mesh
from viscodg.space import DGSpace


# pass/fail lines collected by the acceptance suite, one per criterion
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def case():
    return ManufacturedCase()


@pytest.fixture(scope="session")
def small_setup(case):
    """n=2, k=1 mesh/space/system shared by cheap tests."""
    mesh = build_structured_mesh(2)
    space = DGSpace.build(mesh, 1)
    system = assemble_system(space, case.material, alpha0=10.0, beta0=1.0)
    return mesh, space, system


@pytest.fixture(scope="session")
def quadratic_setup(case):
    """n=4, k=2 mesh/space/system for higher-order checks."""
    mesh = build_structured_mesh(4)
    space = DGSpace.build(mesh, 2)
    system = assemble_system(space, case.material, alpha0=10.0, beta0=1.0)
    return mesh, space, system


@pytest.fixture
def rng():
    return np.random.default_rng(42)
