"""Identifiers, radio parameters, load metrics and the rolling metric window."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

SUPPORTED_SCS_HZ = (15000, 30000, 60000)


class WindowOrderError(ValueError):
    """Raised when a sample is pushed out of timestamp order."""


@dataclass(frozen=True)
class CellConfig:
    cell_id: int
    du_id: int
    center_frequency_hz: int = 3_500_000_000
    bandwidth_hz: int = 20_000_000
    scs_hz: int = 30_000
    total_prbs: int = 51

    def __post_init__(self):
        if self.total_prbs <= 0:
            raise ValueError(f"cell {self.cell_id}: total_prbs must be positive")
        if self.scs_hz not in SUPPORTED_SCS_HZ:
            raise ValueError(f"cell {self.cell_id}: unsupported subcarrier spacing {self.scs_hz}")


@dataclass(frozen=True)
class LoadSample:
    timestamp_ms: int
    dl_prb_utilization_percent: float
    mac_dl_buffer_volume_bits: int
    dl_throughput_bps: int

    def __post_init__(self):
        if not 0.0 <= self.dl_prb_utilization_percent <= 100.0:
            raise ValueError(f"utilization out of range: {self.dl_prb_utilization_percent}")


@dataclass(frozen=True)
class RollingWindow:
    """Time-bounded window of load samples, newest last.

    Each sample closes a reporting period, so the window keeps the samples
    stamped strictly after ``newest - capacity_duration_ms``: with 1 s
    reports and a 10 s capacity that is exactly the last ten periods.
    """

    capacity_duration_ms: int
    samples: Tuple[LoadSample, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.samples)

    @property
    def newest(self) -> LoadSample | None:
        return self.samples[-1] if self.samples else None

    @property
    def span_ms(self) -> int:
        if not self.samples:
            return 0
        return self.samples[-1].timestamp_ms - self.samples[0].timestamp_ms


def prb_utilization(used_prb_slots: int, total_prbs: int, num_slots: int) -> float:
    """Percent of the PRB-slots available in a period that carried data."""
    if total_prbs <= 0 or num_slots <= 0:
        raise ValueError("total_prbs and num_slots must be positive")
    if used_prb_slots < 0 or used_prb_slots > total_prbs * num_slots:
        raise ValueError(
            f"used_prb_slots={used_prb_slots} outside [0, {total_prbs * num_slots}]"
        )
    return 100.0 * used_prb_slots / (total_prbs * num_slots)


def window_push(window: RollingWindow, sample: LoadSample) -> RollingWindow:
    newest = window.newest
    if newest is not None and sample.timestamp_ms <= newest.timestamp_ms:
        raise WindowOrderError(
            f"sample at {sample.timestamp_ms} ms is not newer than {newest.timestamp_ms} ms"
        )
    horizon = sample.timestamp_ms - window.capacity_duration_ms
    kept = tuple(s for s in window.samples if s.timestamp_ms > horizon)
    return RollingWindow(window.capacity_duration_ms, kept + (sample,))


def window_sustained(
    window: RollingWindow,
    predicate: Callable[[LoadSample], bool],
    duration_ms: int,
    granularity_ms: int,
) -> bool:
    """True when the last ``duration_ms / granularity_ms`` samples all satisfy
    ``predicate``. Samples are counted, so a reporting gap breaks the run."""
    if granularity_ms <= 0:
        raise ValueError("granularity_ms must be positive")
    if duration_ms <= 0 or duration_ms % granularity_ms:
        raise ValueError("duration_ms must be a positive multiple of granularity_ms")
    k = duration_ms // granularity_ms
    if len(window.samples) < k:
        return False
    return all(predicate(s) for s in window.samples[-k:])
