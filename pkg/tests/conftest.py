import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from heesch.lattice import GridKind, Transform

settings.register_profile("default", deadline=None, max_examples=150,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=2000,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GRIDS = list(GridKind)
grids = st.sampled_from(GRIDS)


def cells(grid: GridKind, span: int = 30):
    if grid is GridKind.IAMOND:
        return st.builds(lambda i, j, c: (3 * i + c, 3 * j + c),
                         st.integers(-span // 3, span // 3), st.integers(-span // 3, span // 3),
                         st.integers(0, 1))
    return st.tuples(st.integers(-span, span), st.integers(-span, span))


def transforms(grid: GridKind, span: int = 30):
    step = 3 if grid is GridKind.IAMOND else 1
    coord = st.integers(-span // step, span // step).map(lambda v: v * step)
    return st.builds(Transform, st.integers(0, grid.orientation_count - 1), coord, coord)


@pytest.fixture(params=GRIDS, ids=[g.value for g in GRIDS])
def grid(request):
    return request.param


@pytest.fixture(scope="session")
def heptominoes():
    """Every simply connected heptomino with its Heesch numbers at cutoff 2."""
    from heesch.engine import heesch_numbers
    from heesch.polyform import enumerate_free

    return [heesch_numbers(s, 2) for s in enumerate_free(GridKind.SQUARE, 7, exclude_holed=True)]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
