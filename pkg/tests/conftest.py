import pytest

from oran_mlb.harness import load_scenario, run_scenario

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def demo_spec():
    return load_scenario("demo")


@pytest.fixture(scope="session")
def demo_run(demo_spec):
    return run_scenario(demo_spec, keep_slot_log=True)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
