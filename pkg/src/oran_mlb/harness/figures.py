"""Offline KPM dashboard figures rendered from run metrics."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

HIGH_STYLE = dict(color="tab:red", linestyle="--", linewidth=1)
LOW_STYLE = dict(color="goldenrod", linestyle="--", linewidth=1)


def _series(rows, key_index, value_index):
    out = defaultdict(lambda: ([], []))
    for row in rows:
        xs, ys = out[row[key_index]]
        xs.append(row[0] / 1000)
        ys.append(row[value_index])
    return dict(sorted(out.items()))


def render_dashboard(du_rows, ue_rows, thresholds, out_dir, fmt="png"):
    """Per-DU utilization, throughput and buffer, plus per-UE throughput and
    serving DU. Returns the written paths."""
    out = Path(out_dir)
    fig, axes = plt.subplots(5, 1, figsize=(9, 13), sharex=True)
    ax_util, ax_thr, ax_buf, ax_ue, ax_att = axes

    for du, (t, v) in _series(du_rows, 1, 2).items():
        ax_util.plot(t, v, label=f"DU{du}")
    if thresholds:
        ax_util.axhline(thresholds["prb_high_percent"], **HIGH_STYLE, label="high")
        ax_util.axhline(thresholds["prb_low_percent"], **LOW_STYLE, label="low")
    ax_util.set_ylabel("DL PRB util [%]")
    ax_util.set_ylim(-2, 105)

    for du, (t, v) in _series(du_rows, 1, 4).items():
        ax_thr.plot(t, [x / 1e6 for x in v], label=f"DU{du}")
    ax_thr.set_ylabel("DL thr [Mbps]")

    for du, (t, v) in _series(du_rows, 1, 3).items():
        ax_buf.plot(t, [x / 1e6 for x in v], label=f"DU{du}")
    if thresholds:
        ax_buf.axhline(thresholds["buf_high_bits"] / 1e6, **HIGH_STYLE, label="high")
        ax_buf.axhline(thresholds["buf_low_bits"] / 1e6, **LOW_STYLE, label="low")
    ax_buf.set_ylabel("MAC DL buffer [Mbit]")
    ax_buf.set_yscale("symlog", linthresh=1.0)
    ax_buf.set_ylim(bottom=0)

    for ue, (t, v) in _series(ue_rows, 1, 4).items():
        ax_ue.plot(t, [x / 1e6 for x in v], label=f"UE{ue}")
    ax_ue.set_ylabel("UE thr [Mbps]")

    for ue, (t, v) in _series(ue_rows, 1, 2).items():
        ax_att.step(t, v, where="post", label=f"UE{ue}")
    ax_att.set_ylabel("serving DU")
    ax_att.set_xlabel("time [s]")
    du_ids = sorted({r[1] for r in du_rows})
    if du_ids:
        ax_att.set_yticks(du_ids)

    for ax in axes:
        ax.grid(True, alpha=0.3)
        ax.legend(loc="upper right", fontsize=7, ncol=4)
    fig.tight_layout()
    path = out / f"dashboard.{fmt}"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return [path]
