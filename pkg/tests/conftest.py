import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from searchtrack.core import AgentPose, BernoulliTrack
from searchtrack.motion import SensorModel

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sensor():
    return SensorModel()


def flat_sensor(p_d: float, clutter_rate: float = 0.0, kind: str = "vision", **kw) -> SensorModel:
    """Sensor whose detection probability is ``p_d`` everywhere near the origin."""
    return SensorModel(kind=kind, r_d=1e6, p_d_max=p_d, clutter_rate=clutter_rate, **kw)


def point_track(r, label="1", at=(0.0, 0.0), n=1):
    particles = np.tile([at[0], 0.0, at[1], 0.0], (n, 1))
    return BernoulliTrack(label, r, particles, np.full(n, 1.0 / n))


def pose(x=0.0, y=0.0, agent_id=1):
    return AgentPose.at(x, y, agent_id)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""

    def emit(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
