"""Exit criteria for the closed-loop testbench, one test per criterion."""

import contextlib
import random
import time
from collections import defaultdict
from fractions import Fraction

import pytest

from oran_mlb.e2 import decode_message, encode_message
from oran_mlb.harness import load_scenario, parse_scenario, run_scenario, write_outputs
from oran_mlb.xapp import PolicyState, XappConfig, evaluate_policy, on_indication

from conftest import ACCEPTANCE_RESULTS
from strategies import random_message
from test_e2 import CONTROL_MSG, CONTROL_VECTOR
from test_xapp import ind

TTT_MS = 10_000
WINDOW_SLACK_MS = 3_000
CAPACITY_BPS = 51 * 672 * 2000
SCENARIOS = ("demo", "pingpong", "idle")


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append(f"FAIL  {number}. {title}")
        print(f"FAIL  {number}. {title}")
        raise
    ACCEPTANCE_RESULTS.append(f"PASS  {number}. {title}")
    print(f"PASS  {number}. {title}")


def single_ue_scenario(rate_bps, duration_ms=20_000):
    return parse_scenario(f"""
scenario.duration_ms = {duration_ms}
cell.1.du_id = 1
cell.1.center_frequency_hz = 3430080000
ue.1.role = stationary
ue.1.initial_du = 1
ue.1.traffic = 0:{rate_bps}
xapp.home_du = 1
""")


@pytest.fixture(scope="module")
def all_runs():
    runs = {name: run_scenario(load_scenario(name), keep_slot_log=True) for name in SCENARIOS}
    for rate in (60_000_000, 80_000_000):
        runs[f"single_{rate}"] = run_scenario(single_ue_scenario(rate), keep_slot_log=True)
    return runs


def test_1_demo_loop_reproduction(demo_spec):
    with criterion(1, "demo loop: offload then return, timing windows, final DU1, < 10 s"):
        started = time.perf_counter()
        art = run_scenario(demo_spec)
        wall = time.perf_counter() - started

        mobile = next(iter(demo_spec.xapp.mobile_ues))
        hos = art.summary["handovers"]
        assert len(hos) == 2 and all(h["ue_id"] == mobile for h in hos)
        offload, ret = hos
        assert (offload["source_du"], offload["target_du"]) == (1, 2)
        assert (ret["source_du"], ret["target_du"]) == (2, 1)

        issued = {e["fields"]["control_id"]: e["time_ms"] for e in art.events if e["type"] == "HO_ISSUED"}
        cfg = demo_spec.xapp
        first_overloaded = min(t for t, du, util, buf, _ in art.du_metrics
                               if du == 1 and util >= cfg.prb_high_percent and buf >= cfg.buf_high_bits)
        onset = first_overloaded - cfg.granularity_ms
        delay = issued[offload["control_id"]] - onset
        assert TTT_MS <= delay <= TTT_MS + WINDOW_SLACK_MS, delay

        drop = demo_spec.ues[1].traffic.phases[1][0]
        assert drop == 40_000
        delay = issued[ret["control_id"]] - drop
        assert TTT_MS <= delay <= TTT_MS + WINDOW_SLACK_MS, delay

        assert art.summary["final_attachments"][str(mobile)] == 1
        assert wall < 10.0, wall


def test_2_ping_pong_guard():
    with criterion(2, "ping-pong guard: no UE handed over twice within 10 s"):
        spec = load_scenario("pingpong")
        assert spec.duration_ms == 120_000
        phases = spec.ues[1].traffic.phases
        assert all(b[0] - a[0] == 4000 for a, b in zip(phases, phases[1:]))
        art = run_scenario(spec)
        # the load really does cross both threshold pairs
        du1 = [r for r in art.du_metrics if r[1] == 1]
        assert any(u >= 90 and b >= 5_000_000 for _, _, u, b, _ in du1)
        assert any(u <= 50 and b <= 1_000_000 for _, _, u, b, _ in du1)
        per_ue = defaultdict(list)
        for h in art.summary["handovers"]:
            per_ue[h["ue_id"]].append(h["time_ms"])
        violations = sum(1 for ts in per_ue.values() for a, b in zip(ts, ts[1:]) if b - a < TTT_MS)
        assert violations == 0


def _primed(n):
    cfg = XappConfig(home_du=1, du_cells={1: 1, 2: 2}, mobile_ues={1})
    s = PolicyState.initial(cfg)
    for i in range(1, n + 1):
        on_indication(s, ind(2, 1000 * i, 0.0, 0))
        on_indication(s, ind(1, 1000 * i, 100.0, 6_000_000, (1, 2)))
    return cfg, s


def test_3_ttt_boundary():
    with criterion(3, "TTT boundary: 9 qualifying samples -> none, 10th -> decision"):
        cfg, s = _primed(9)
        assert evaluate_policy(s, cfg, 9000) is None
        on_indication(s, ind(1, 10_000, 100.0, 6_000_000, (1, 2)))
        assert evaluate_policy(s, cfg, 10_000) is not None


def test_4_conjunction_semantics():
    with criterion(4, "conjunction: util 95% with 2 Mbit buffer for 10 samples -> none"):
        cfg = XappConfig(home_du=1, du_cells={1: 1, 2: 2}, mobile_ues={1})
        s = PolicyState.initial(cfg)
        for i in range(1, 11):
            on_indication(s, ind(2, 1000 * i, 0.0, 0))
            on_indication(s, ind(1, 1000 * i, 95.0, 2_000_000, (1, 2)))
        assert len(s.windows[1]) == 10
        assert evaluate_policy(s, cfg, 10_000) is None


def test_5_conservation(all_runs):
    with criterion(5, "conservation: arrived = served + final buffer for every UE"):
        for name, art in all_runs.items():
            s = art.summary
            for uid, arrived in s["per_ue_arrived_bits"].items():
                assert arrived == s["per_ue_delivered_bits"][uid] + s["per_ue_final_buffer_bits"][uid], (name, uid)


def test_6_utilization_oracle(all_runs):
    with criterion(6, "utilization: brute force from slot log matches reports within 1e-9"):
        for name, art in all_runs.items():
            per_period = 1000 * 1000 // art.slot_us
            used, slots = defaultdict(int), defaultdict(int)
            for slot, du, prbs, _ in art.slot_log:
                key = ((slot // per_period + 1) * 1000, du)
                used[key] += prbs
                slots[key] += 1
            assert len(art.du_metrics) == len(used)
            for t, du, util, _, _ in art.du_metrics:
                exact = Fraction(100 * used[t, du], 51 * slots[t, du])
                if exact == 0:
                    assert util == 0.0
                else:
                    assert abs(Fraction(util) - exact) / exact <= Fraction(1, 10**9), (name, t, du)


def test_7_codec():
    with criterion(7, "codec: 1000 random messages round-trip byte-exactly; fixed test vector"):
        rng = random.Random(7)
        for _ in range(1000):
            msg = random_message(rng)
            frame = encode_message(msg)
            back = decode_message(frame)
            assert back == msg
            assert encode_message(back) == frame
        assert encode_message(CONTROL_MSG) == CONTROL_VECTOR
        assert CONTROL_VECTOR.hex(" ") == "00 00 00 0f 04 00 00 00 00 03 01 00 00 00 07 00 00 00 02"


def test_8_determinism(tmp_path):
    with criterion(8, "determinism: same seed -> byte-identical events.jsonl"):
        for name in SCENARIOS:
            spec = load_scenario(name)
            blobs = []
            for i in range(2):
                out = tmp_path / f"{name}{i}"
                write_outputs(run_scenario(spec, seed=11), out)
                blobs.append((out / "events.jsonl").read_bytes())
            assert blobs[0] == blobs[1] and blobs[0]


def test_9_capacity_sanity(all_runs):
    with criterion(9, "capacity: 60 Mbps carried; 80 Mbps saturates at 68.544 Mbps, buffer +11.456 Mbit/s"):
        assert CAPACITY_BPS == 68_544_000

        low = all_runs["single_60000000"]
        for t, _, _, buf, thr in low.du_metrics:
            assert abs(thr - 60_000_000) <= 0.01 * 60_000_000, t
            assert buf <= 60_000_000 // 2000

        high = all_runs["single_80000000"]
        times = [t / 1000 for t, *_ in high.du_metrics]
        bufs = [buf for _, _, _, buf, _ in high.du_metrics]
        for _, _, util, _, thr in high.du_metrics:
            assert util == 100.0
            assert abs(thr - CAPACITY_BPS) <= 0.01 * CAPACITY_BPS
        n = len(times)
        mt, mb = sum(times) / n, sum(bufs) / n
        slope = sum((t - mt) * (b - mb) for t, b in zip(times, bufs)) / sum((t - mt) ** 2 for t in times)
        assert abs(slope - 11_456_000) <= 0.02 * 11_456_000, slope
        steps = [b - a for a, b in zip(bufs, bufs[1:])]
        assert all(abs(d - 11_456_000) <= 0.02 * 11_456_000 for d in steps)
