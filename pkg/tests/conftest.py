import pytest

from phcsim import PHC1, PHC2, ScenarioConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def short_cfg():
    """Full two-facility model over a short horizon, for fast integration tests."""
    return ScenarioConfig(policy="none", replications=2, warmup_days=10, horizon_days=60,
                          facilities=(PHC1, PHC2))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
