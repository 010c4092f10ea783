import pytest

from jcmp.channel import ChannelParams, TxMode, default_mode_table
from jcmp.motion import MotionParams
from jcmp.scenario import Grid, Scenario, default_scenario

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def modes():
    return default_mode_table()


@pytest.fixture(scope="session")
def channel():
    return ChannelParams()


@pytest.fixture(scope="session")
def default_scen():
    return default_scenario()


@pytest.fixture
def unit_mode():
    # a=1, g=1, gamma_p=0: PER(gamma) = exp(-gamma)
    return TxMode("unit", 1.0, 1.0, 1.0, 0.0)


def small_scenario(**kw) -> Scenario:
    """Cheap relay scenario on a coarse grid around the midpoint."""
    base = dict(
        base_pos=(0.0, 0.0),
        sense_traj=((100.0, 20.0), (102.0, 20.0), (110.0, 25.0)),
        router_start=(50.0, 10.0),
        dt=10.0, data_D=1e9, eps_target=0.01, p_max=4.0,
        grid=Grid(40.0, 60.0, 0.0, 20.0, 5.0),
        motion=MotionParams(),
    )
    base.update(kw)
    return Scenario(**base)


@pytest.fixture
def small():
    return small_scenario()


@pytest.fixture(scope="session")
def default_compare(default_scen):
    from jcmp.simcore import compare
    return compare(default_scen)
