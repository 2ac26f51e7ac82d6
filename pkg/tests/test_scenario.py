import pytest

from oran_mlb.harness.scenario import (
    ScenarioError,
    bundled_scenario_text,
    load_scenario,
    parse_scenario,
    parse_traffic,
)
from oran_mlb.ransim import Role

MINIMAL = """\
scenario.duration_ms = 5000
cell.1.du_id = 1
cell.1.center_frequency_hz = 3430080000
cell.2.du_id = 2
cell.2.center_frequency_hz = 3489120000
ue.1.role = mobile
ue.1.initial_du = 1
ue.1.traffic = 0:20000000
ue.2.role = stationary
ue.2.initial_du = 1
ue.2.traffic = 0:60000000, 40000:20000000
xapp.home_du = 1
"""


def test_bundled_demo():
    spec = load_scenario("demo")
    assert len(spec.cells) == 2 and len(spec.ues) == 2
    assert spec.xapp.home_du == 1
    assert spec.xapp.mobile_ues == {1}
    for cell in spec.cells:
        assert (cell.total_prbs, cell.bandwidth_hz, cell.scs_hz) == (51, 20_000_000, 30_000)
        assert 3_300_000_000 <= cell.center_frequency_hz <= 3_800_000_000
    assert spec.cells[0].center_frequency_hz != spec.cells[1].center_frequency_hz
    assert spec.duration_ms == 80_000


def test_defaults_applied():
    spec = parse_scenario(MINIMAL)
    assert spec.xapp.ttt_ms == 10_000
    assert spec.xapp.granularity_ms == spec.sim.granularity_ms == 1000
    assert spec.sim.slot_duration_ms == 0.5 and spec.sim.ho_interruption_ms == 50
    assert spec.ues[0].role is Role.MOBILE and spec.ues[0].spectral_efficiency == 4.0
    assert spec.ues[1].traffic.phases == ((0, 60_000_000), (40_000, 20_000_000))
    assert spec.xapp.du_cells == {1: 1, 2: 2}


def test_comments_and_underscores():
    spec = parse_scenario("# header\n" + MINIMAL.replace("0:20000000", "0:20_000_000  # cbr"))
    assert spec.ues[0].traffic.phases == ((0, 20_000_000),)


def error_line(text):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    return info.value.line, str(info.value)


def test_unknown_initial_du():
    line, msg = error_line(MINIMAL.replace("ue.1.initial_du = 1", "ue.1.initial_du = 9"))
    assert line == 6 and "initial_du 9" in msg


def test_duplicate_key():
    line, msg = error_line(MINIMAL + "xapp.home_du = 2\n")
    assert line == 13 and "duplicate key" in msg


def test_duplicate_du_id():
    line, msg = error_line(MINIMAL.replace("cell.2.du_id = 2", "cell.2.du_id = 1"))
    assert line == 4 and "duplicate DU" in msg


@pytest.mark.parametrize("traffic", ["20000000", "0:1,0:2", "5:1", "0:x"])
def test_malformed_phase_list(traffic):
    line, _ = error_line(MINIMAL.replace("0:20000000", traffic))
    assert line == 8


def test_missing_required_keys():
    line, msg = error_line(MINIMAL.replace("ue.2.role = stationary\n", ""))
    assert "ue.2.role" in msg and line == 9
    _, msg = error_line(MINIMAL.replace("xapp.home_du = 1\n", ""))
    assert "xapp.home_du" in msg
    _, msg = error_line(MINIMAL.replace("scenario.duration_ms = 5000\n", ""))
    assert "scenario.duration_ms" in msg


@pytest.mark.parametrize("bad, line", [
    ("cell.1.colour = red", 13),
    ("sim.bogus = 1", 13),
    ("nonsense", 13),
    ("ue.1.role = flying", 13),
])
def test_bad_lines(bad, line):
    text = MINIMAL.replace("ue.1.role = mobile\n", "") if bad.startswith("ue.1.role") else MINIMAL
    got, _ = error_line(text + bad + "\n")
    assert got == (12 if bad.startswith("ue.1.role") else line)


def test_invalid_threshold_order():
    _, msg = error_line(MINIMAL + "xapp.prb_low_percent = 95\n")
    assert "prb_low_percent" in msg


def test_parse_traffic():
    assert parse_traffic("0:1, 10:2").phases == ((0, 1), (10, 2))


@pytest.mark.parametrize("name", ["demo", "pingpong", "idle"])
def test_bundled_scenarios_parse(name):
    assert parse_scenario(bundled_scenario_text(name)).name == name
