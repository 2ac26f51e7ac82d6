from __future__ import annotations

import csv
import json
from pathlib import Path

from .runner import RunArtifacts

DU_HEADER = ("time_s", "du_id", "prb_util_percent", "buffer_bits", "throughput_bps")
UE_HEADER = ("time_s", "ue_id", "serving_du", "buffer_bits", "throughput_bps")
SLOT_HEADER = ("slot", "time_ms", "du_id", "used_prbs", "served_bits")


def _seconds(ms) -> str:
    return f"{ms / 1000:.6f}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_outputs(artifacts: RunArtifacts, out_dir, slot_log: bool = False, figures: bool = False):
    """Write CSV tables, the JSONL event log and summary.json; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "du_metrics.csv"
    _write_csv(path, DU_HEADER, (
        (_seconds(t), du, f"{util:.6f}", buf, thr) for t, du, util, buf, thr in artifacts.du_metrics
    ))
    written.append(path)

    path = out / "ue_metrics.csv"
    _write_csv(path, UE_HEADER, (
        (_seconds(t), ue, du, buf, thr) for t, ue, du, buf, thr in artifacts.ue_metrics
    ))
    written.append(path)

    path = out / "events.jsonl"
    with open(path, "w") as f:
        for event in artifacts.events:
            f.write(json.dumps(event, separators=(",", ":")) + "\n")
    written.append(path)

    path = out / "summary.json"
    path.write_text(json.dumps(artifacts.summary, indent=2) + "\n")
    written.append(path)

    if slot_log:
        if artifacts.slot_log is None:
            raise ValueError("run was made without a slot log")
        path = out / "slot_log.csv"
        us = artifacts.slot_us
        _write_csv(path, SLOT_HEADER, (
            (slot, f"{slot * us / 1000:.6f}", du, used, served)
            for slot, du, used, served in artifacts.slot_log
        ))
        written.append(path)

    if figures:
        from .figures import render_dashboard
        written.extend(render_dashboard(artifacts.du_metrics, artifacts.ue_metrics,
                                        artifacts.thresholds, out))
    return written


def read_metrics(out_dir):
    """Load du/ue metric tables and thresholds back from a run directory."""
    out = Path(out_dir)
    with open(out / "du_metrics.csv", newline="") as f:
        du_rows = [(round(float(r["time_s"]) * 1000), int(r["du_id"]), float(r["prb_util_percent"]),
                    int(r["buffer_bits"]), int(r["throughput_bps"])) for r in csv.DictReader(f)]
    with open(out / "ue_metrics.csv", newline="") as f:
        ue_rows = [(round(float(r["time_s"]) * 1000), int(r["ue_id"]), int(r["serving_du"]),
                    int(r["buffer_bits"]), int(r["throughput_bps"])) for r in csv.DictReader(f)]
    summary = json.loads((out / "summary.json").read_text())
    return du_rows, ue_rows, summary.get("thresholds", {})
