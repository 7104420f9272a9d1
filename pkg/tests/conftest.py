import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qreset.dynamics import LindbladConfig, ProtocolSchedule, ResetChannel  # noqa: E402

SCHEDULES = {
    "fig1-rotating": ProtocolSchedule.rotating_gap,
    "fig2-fixed-angle": ProtocolSchedule.fixed_angle_gap,
    "fig3-relaxation": ProtocolSchedule.relaxation,
}

_channels = {}


@pytest.fixture(scope="session")
def full_channel():
    """Probe runs of a protocol at full resolution (default parameters), built once per session."""

    def get(name):
        if name not in _channels:
            _channels[name] = ResetChannel.from_protocol(SCHEDULES[name](), LindbladConfig())
        return _channels[name]

    return get


# Acceptance lines recorded by tests/test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
