import pytest

from wavefront.engine import iterate
from wavefront.models import BZParams, PredatorPreyParams, bz_lower, bz_model, bz_upper
from wavefront.perron import Grid

PP_DESK = PredatorPreyParams(d1=1.0, d2=3.0, r=1.0, P=1.0, a=1.0, b=1.0, nu=0.5, tau=1.0)
BZ_DESK = BZParams(r=0.5, b=0.5, tau=1.0)
DESK_C = 2.5

# filled by test_acceptance, printed after the run
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def bz_solution():
    """Converged BZ desk front on the iteration grid."""
    grid = Grid.symmetric(150.0, 0.02)
    model = bz_model(BZ_DESK, DESK_C)
    up = bz_upper(BZ_DESK, DESK_C, grid, model)
    lo = bz_lower(BZ_DESK, DESK_C, grid=grid, model=model, upper=up)
    rep = iterate(model, up.profile(grid), lo.profile(grid))
    return model, grid, up, lo, rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
