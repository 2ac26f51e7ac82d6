"""Slot-level simulation of one CU with several DUs.

Within every slot the simulator runs, in this fixed order:

1. pending E2 messages (subscriptions, handover controls),
2. traffic arrivals for every UE,
3. PRB scheduling at every DU (ascending du_id),
4. KPM collection for DUs whose reporting period ends with the slot.

Time is a logical clock. Slots are indexed by integers and the slot length
is held in whole microseconds, so every timestamp is exact.
"""

from __future__ import annotations

import bisect
import functools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .domain import CellConfig, LoadSample, prb_utilization
from .e2 import messages as m
from .e2.codec import UnsupportedError, E2Error

log = logging.getLogger(__name__)

SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_SLOT = 14
US_PER_S = 1_000_000


class Role(str, Enum):
    MOBILE = "mobile"
    STATIONARY = "stationary"


class HandoverError(Exception):
    cause = m.FailureCause.UNSUPPORTED


class StaleContextError(HandoverError):
    cause = m.FailureCause.STALE_CONTEXT


class InvalidTargetError(HandoverError):
    cause = m.FailureCause.INVALID_TARGET


@dataclass(frozen=True)
class TrafficProfile:
    """Piecewise-constant downlink offered load, as (start_ms, bps) phases."""

    phases: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not self.phases or self.phases[0][0] != 0:
            raise ValueError("first traffic phase must start at 0 ms")
        starts = [p[0] for p in self.phases]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("traffic phase start times must be strictly increasing")
        if any(rate < 0 for _, rate in self.phases):
            raise ValueError("traffic rates must be non-negative")
        object.__setattr__(self, "_starts", tuple(starts))

    @classmethod
    def constant(cls, bps: int) -> "TrafficProfile":
        return cls(((0, bps),))

    def rate_at(self, now_ms: float) -> int:
        i = bisect.bisect_right(self._starts, now_ms) - 1
        return self.phases[i][1]


@dataclass
class UeContext:
    ue_id: int
    role: Role
    serving_du: int
    traffic: TrafficProfile
    spectral_efficiency_bits_per_symbol: float = 4.0
    buffer_bits: int = 0
    ho_blackout_until_ms: float = 0
    # arrival remainder, in millionths of a bit
    arrival_carry: int = 0
    arrived_bits: int = 0
    served_bits: int = 0
    dropped_bits: int = 0
    period_served_bits: int = 0

    def __post_init__(self):
        if self.spectral_efficiency_bits_per_symbol <= 0:
            raise ValueError(f"UE {self.ue_id}: spectral efficiency must be positive")
        self.role = Role(self.role)


@dataclass
class DuState:
    du_id: int
    cell: CellConfig
    attached_ues: set = field(default_factory=set)
    used_prb_slots: int = 0
    served_bits: int = 0
    slot_count: int = 0

    def reset_period(self):
        self.used_prb_slots = 0
        self.served_bits = 0
        self.slot_count = 0


@dataclass(frozen=True)
class SimConfig:
    slot_duration_ms: float = 0.5
    granularity_ms: int = 1000
    ho_interruption_ms: int = 50
    seed: int = 0
    preserve_buffer_on_ho: bool = True

    def __post_init__(self):
        if self.slot_duration_ms <= 0:
            raise ValueError("slot_duration_ms must be positive")
        slot_us = self.slot_duration_ms * 1000
        if abs(slot_us - round(slot_us)) > 1e-9:
            raise ValueError("slot_duration_ms must be a whole number of microseconds")
        if self.granularity_ms <= 0 or (self.granularity_ms * 1000) % self.slot_us:
            raise ValueError("granularity_ms must be a positive multiple of the slot duration")

    @property
    def slot_us(self) -> int:
        return round(self.slot_duration_ms * 1000)

    @property
    def slots_per_period(self) -> int:
        return self.granularity_ms * 1000 // self.slot_us


@dataclass(frozen=True)
class SlotOutcome:
    du_id: int
    time_ms: float
    served: Dict[int, int]
    used_prbs: Dict[int, int]

    @property
    def total_used_prbs(self) -> int:
        return sum(self.used_prbs.values())

    @property
    def total_served(self) -> int:
        return sum(self.served.values())


@dataclass(frozen=True)
class HandoverResult:
    ue_id: int
    source_du: int
    target_du: int
    time_ms: int
    buffer_bits: int


@dataclass(frozen=True)
class UeReport:
    ue_id: int
    buffer_bits: int
    throughput_bps: int


@dataclass(frozen=True)
class KpmReport:
    du_id: int
    sample: LoadSample
    ues: Tuple[UeReport, ...]


@functools.lru_cache(maxsize=None)
def bits_per_prb_per_slot(cell: CellConfig, se: float) -> int:
    if se <= 0:
        raise ValueError("spectral efficiency must be positive")
    return max(1, int(SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT * se))


def enqueue_arrivals(ue: UeContext, now_ms: float, slot_duration_ms: float) -> UeContext:
    """Add one slot of CBR arrivals; fractions of a bit carry to the next slot."""
    slot_us = round(slot_duration_ms * 1000)
    total = ue.traffic.rate_at(now_ms) * slot_us + ue.arrival_carry
    bits, ue.arrival_carry = divmod(total, US_PER_S)
    ue.buffer_bits += bits
    ue.arrived_bits += bits
    return ue


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def allocate_prbs(demands: Dict[int, int], total_prbs: int) -> Dict[int, int]:
    """Equal-share PRB split among UEs with demand, handing PRBs left unused
    by lightly loaded UEs to the rest. Odd PRBs go to the lowest ue_id."""
    alloc = {uid: 0 for uid in demands}
    active = sorted(uid for uid, d in demands.items() if d > 0)
    if len(active) == 1:
        alloc[active[0]] = min(demands[active[0]], total_prbs)
        return alloc
    remaining = total_prbs
    while active and remaining > 0:
        share, extra = divmod(remaining, len(active))
        quotas = {uid: share + (1 if i < extra else 0) for i, uid in enumerate(active)}
        satisfied = [uid for uid in active if demands[uid] <= quotas[uid]]
        if not satisfied:
            for uid in active:
                alloc[uid] = quotas[uid]
            break
        for uid in satisfied:
            alloc[uid] = demands[uid]
            remaining -= demands[uid]
        active = [uid for uid in active if uid not in satisfied]
    return alloc


def step_slot(du: DuState, ues: Sequence[UeContext], now_ms: float) -> SlotOutcome:
    du.slot_count += 1
    if not any(ue.buffer_bits for ue in ues):
        zeros = {ue.ue_id: 0 for ue in ues}
        return SlotOutcome(du.du_id, now_ms, zeros, dict(zeros))
    bpp = {
        ue.ue_id: bits_per_prb_per_slot(du.cell, ue.spectral_efficiency_bits_per_symbol)
        for ue in ues
    }
    demands = {ue.ue_id: _ceil_div(ue.buffer_bits, bpp[ue.ue_id]) for ue in ues}
    alloc = allocate_prbs(demands, du.cell.total_prbs)
    served, used = {}, {}
    for ue in ues:
        uid = ue.ue_id
        bits = min(ue.buffer_bits, alloc[uid] * bpp[uid])
        served[uid] = bits
        used[uid] = _ceil_div(bits, bpp[uid])
        ue.buffer_bits -= bits
        ue.served_bits += bits
        ue.period_served_bits += bits
    du.used_prb_slots += sum(used.values())
    du.served_bits += sum(served.values())
    return SlotOutcome(du.du_id, now_ms, served, used)


@dataclass
class CentralUnit:
    """UE contexts and DU attachments, as anchored at the CU."""

    dus: Dict[int, DuState]
    ues: Dict[int, UeContext]

    def du_for_cell(self, cell_id: int) -> Optional[int]:
        for du in self.dus.values():
            if du.cell.cell_id == cell_id:
                return du.du_id
        return None


def execute_handover(
    cu: CentralUnit,
    ue_id: int,
    source_du: int,
    target_du: int,
    now_ms: int,
    interruption_ms: int = 50,
    preserve_buffer: bool = True,
) -> HandoverResult:
    ue = cu.ues.get(ue_id)
    if ue is None or source_du not in cu.dus or ue_id not in cu.dus[source_du].attached_ues:
        raise StaleContextError(f"UE {ue_id} is not attached to DU {source_du}")
    if target_du not in cu.dus or target_du == source_du:
        raise InvalidTargetError(f"invalid handover target DU {target_du}")
    cu.dus[source_du].attached_ues.discard(ue_id)
    cu.dus[target_du].attached_ues.add(ue_id)
    ue.serving_du = target_du
    ue.ho_blackout_until_ms = now_ms + interruption_ms
    if not preserve_buffer:
        ue.dropped_bits += ue.buffer_bits
        ue.buffer_bits = 0
    return HandoverResult(ue_id, source_du, target_du, now_ms, ue.buffer_bits)


def collect_kpm_report(
    du: DuState, ues: Sequence[UeContext], period_end_ms: int, granularity_ms: int
) -> KpmReport:
    util = prb_utilization(du.used_prb_slots, du.cell.total_prbs, du.slot_count) if du.slot_count else 0.0
    sample = LoadSample(
        timestamp_ms=period_end_ms,
        dl_prb_utilization_percent=util,
        mac_dl_buffer_volume_bits=sum(ue.buffer_bits for ue in ues),
        dl_throughput_bps=du.served_bits * 1000 // granularity_ms,
    )
    ue_reports = []
    for ue in sorted(ues, key=lambda u: u.ue_id):
        ue_reports.append(
            UeReport(ue.ue_id, ue.buffer_bits, ue.period_served_bits * 1000 // granularity_ms)
        )
        ue.period_served_bits = 0
    du.reset_period()
    return KpmReport(du.du_id, sample, tuple(ue_reports))


EventSink = Callable[[str, int, dict], None]


class Simulator:
    """RAN side of the closed loop.

    ``endpoint`` is the RAN end of an E2 transport; when given, subscribed
    DUs report over it and handover controls are read from it.
    """

    def __init__(
        self,
        config: SimConfig,
        cells: Sequence[CellConfig],
        ues: Sequence[UeContext],
        endpoint=None,
        on_event: Optional[EventSink] = None,
        keep_slot_log: bool = False,
    ):
        self.config = config
        dus = {}
        for cell in sorted(cells, key=lambda c: c.du_id):
            if cell.du_id in dus:
                raise ValueError(f"duplicate DU {cell.du_id}")
            dus[cell.du_id] = DuState(cell.du_id, cell)
        ue_map = {}
        for ue in ues:
            if ue.ue_id in ue_map:
                raise ValueError(f"duplicate UE {ue.ue_id}")
            if ue.serving_du not in dus:
                raise ValueError(f"UE {ue.ue_id} attached to unknown DU {ue.serving_du}")
            ue_map[ue.ue_id] = ue
            dus[ue.serving_du].attached_ues.add(ue.ue_id)
        self.cu = CentralUnit(dus, dict(sorted(ue_map.items())))
        self.endpoint = endpoint
        self._on_event = on_event
        self.slot = 0
        self.subscriptions: Dict[int, int] = {}  # du_id -> request_id
        self.reports: List[KpmReport] = []
        self.events: List[dict] = []
        self.slot_log: Optional[List[Tuple[int, int, int, int]]] = [] if keep_slot_log else None
        self.handovers: List[HandoverResult] = []

    @property
    def now_ms(self) -> float:
        return self.slot * self.config.slot_us / 1000

    def _emit(self, kind: str, time_ms, **fields):
        time_ms = int(time_ms) if float(time_ms).is_integer() else time_ms
        event = {"type": kind, "time_ms": time_ms, "fields": fields}
        self.events.append(event)
        if self._on_event is not None:
            self._on_event(kind, time_ms, fields)

    # -- E2 handling -----------------------------------------------------

    def process_messages(self) -> int:
        """Handle every message waiting on the E2 endpoint; returns the count."""
        if self.endpoint is None:
            return 0
        handled = 0
        while True:
            try:
                msg = self.endpoint.receive()
            except UnsupportedError as exc:
                handled += 1
                if exc.control_id is not None:
                    self._fail(exc.control_id, m.FailureCause.UNSUPPORTED, str(exc))
                else:
                    log.warning("dropping undecodable E2 message: %s", exc)
                continue
            if msg is None:
                return handled
            handled += 1
            if isinstance(msg, m.SubscriptionRequest):
                self._subscribe(msg)
            elif isinstance(msg, m.RicControlRequest):
                self._control(msg)
            else:
                log.warning("RAN ignoring unexpected %s", type(msg).__name__)

    def _subscribe(self, req: m.SubscriptionRequest):
        ok = req.du_id in self.cu.dus and req.granularity_ms == self.config.granularity_ms
        if ok:
            self.subscriptions[req.du_id] = req.request_id
        self.endpoint.send(m.SubscriptionResponse(req.request_id, req.du_id, ok))
        self._emit("SUBSCRIPTION_RESPONSE", self.now_ms,
                   request_id=req.request_id, du_id=req.du_id, accepted=ok)

    def _control(self, req: m.RicControlRequest):
        now = self.now_ms
        ue = self.cu.ues.get(req.ue_id)
        target = self.cu.du_for_cell(req.target_cell_id)
        try:
            if ue is None:
                raise StaleContextError(f"unknown UE {req.ue_id}")
            if target is None:
                raise InvalidTargetError(f"unknown cell {req.target_cell_id}")
            if target == ue.serving_du:
                raise StaleContextError(f"UE {req.ue_id} already served by DU {target}")
            result = execute_handover(
                self.cu, req.ue_id, ue.serving_du, target, now,
                self.config.ho_interruption_ms, self.config.preserve_buffer_on_ho,
            )
        except HandoverError as exc:
            self._fail(req.control_id, exc.cause, str(exc))
            return
        self.handovers.append(result)
        self.endpoint.send(m.RicControlAck(req.control_id))
        self._emit("HO_COMPLETED", now, control_id=req.control_id, ue_id=result.ue_id,
                   source_du=result.source_du, target_du=result.target_du,
                   buffer_bits=result.buffer_bits)

    def _fail(self, control_id: int, cause, detail: str):
        cause = m.FailureCause(cause)
        self.endpoint.send(m.RicControlFailure(control_id, cause))
        self._emit("HO_FAILED", self.now_ms, control_id=control_id,
                   cause=cause.name.lower(), detail=detail)

    # -- event loop ------------------------------------------------------

    def run_until(self, t_end_ms: float) -> List[dict]:
        """Advance the clock to ``t_end_ms``; returns the events produced."""
        cfg = self.config
        end_slot = round(t_end_ms * 1000) // cfg.slot_us
        if end_slot < self.slot:
            raise ValueError(f"cannot run backwards to {t_end_ms} ms")
        first_event = len(self.events)
        per_period = cfg.slots_per_period
        dus = list(self.cu.dus.values())
        ues = list(self.cu.ues.values())
        slot_ms = cfg.slot_duration_ms
        attached = self._attached_lists()
        while self.slot < end_slot:
            now = self.now_ms
            if self.process_messages():
                attached = self._attached_lists()
            for ue in ues:
                enqueue_arrivals(ue, now, slot_ms)
            for du in dus:
                active = [ue for ue in attached[du.du_id] if ue.ho_blackout_until_ms <= now]
                outcome = step_slot(du, active, now)
                if self.slot_log is not None:
                    self.slot_log.append(
                        (self.slot, du.du_id, outcome.total_used_prbs, outcome.total_served)
                    )
            self.slot += 1
            if self.slot % per_period == 0:
                self._report(self.slot * cfg.slot_us // 1000)
        return self.events[first_event:]

    def _attached_lists(self) -> Dict[int, List[UeContext]]:
        return {
            du_id: [self.cu.ues[uid] for uid in sorted(du.attached_ues)]
            for du_id, du in self.cu.dus.items()
        }

    def _report(self, period_end_ms: int):
        for du in self.cu.dus.values():
            attached = [self.cu.ues[uid] for uid in sorted(du.attached_ues)]
            report = collect_kpm_report(du, attached, period_end_ms, self.config.granularity_ms)
            self.reports.append(report)
            s = report.sample
            self._emit("KPM_REPORT", period_end_ms, du_id=du.du_id,
                       prb_util_percent=s.dl_prb_utilization_percent,
                       buffer_bits=s.mac_dl_buffer_volume_bits,
                       throughput_bps=s.dl_throughput_bps,
                       ues=[[u.ue_id, u.buffer_bits, u.throughput_bps] for u in report.ues])
            request_id = self.subscriptions.get(du.du_id)
            if request_id is not None and self.endpoint is not None:
                try:
                    self.endpoint.send(m.RicIndication(
                        request_id, du.du_id, period_end_ms,
                        s.dl_prb_utilization_percent, s.mac_dl_buffer_volume_bits,
                        s.dl_throughput_bps,
                        tuple(m.UeMetric(u.ue_id, u.buffer_bits, u.throughput_bps) for u in report.ues),
                    ))
                except E2Error as exc:
                    log.warning("indication for DU %d not sent: %s", du.du_id, exc)
                    continue
                self._emit("INDICATION", period_end_ms, request_id=request_id, du_id=du.du_id)
