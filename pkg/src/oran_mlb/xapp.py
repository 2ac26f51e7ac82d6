"""Mobility load balancing xApp.

Keeps a rolling window of DU-level KPM samples per DU, tracks which DU
serves each UE, and moves a mobile UE off the home DU when the home DU stays
overloaded, then back once the home DU stays lightly loaded.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional

from .domain import LoadSample, RollingWindow, window_push, window_sustained
from .e2 import messages as m

log = logging.getLogger(__name__)

OFFLOAD = "offload"
RETURN = "return"


class XappError(Exception):
    pass


class BusyError(XappError):
    """A control request is already awaiting its outcome."""


class ProtocolError(XappError):
    """An ack or failure did not match the outstanding control request."""


@dataclass(frozen=True)
class XappConfig:
    home_du: int
    du_cells: Mapping[int, int]
    mobile_ues: FrozenSet[int]
    prb_high_percent: float = 90.0
    prb_low_percent: float = 50.0
    buf_high_bits: int = 5_000_000
    buf_low_bits: int = 1_000_000
    ttt_ms: int = 10_000
    window_ms: int = 10_000
    granularity_ms: int = 1_000
    # False switches both threshold tests from AND to OR
    require_both_metrics: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mobile_ues", frozenset(self.mobile_ues))
        object.__setattr__(self, "du_cells", dict(self.du_cells))
        if self.home_du not in self.du_cells:
            raise ValueError(f"home DU {self.home_du} has no cell")
        if not self.prb_low_percent < self.prb_high_percent:
            raise ValueError("prb_low_percent must be below prb_high_percent")
        if not self.buf_low_bits < self.buf_high_bits:
            raise ValueError("buf_low_bits must be below buf_high_bits")
        if self.granularity_ms <= 0 or self.ttt_ms <= 0 or self.ttt_ms % self.granularity_ms:
            raise ValueError("ttt_ms must be a positive multiple of granularity_ms")
        if self.ttt_ms > self.window_ms:
            raise ValueError("ttt_ms must not exceed window_ms")

    def overloaded(self, s: LoadSample) -> bool:
        hi_util = s.dl_prb_utilization_percent >= self.prb_high_percent
        hi_buf = s.mac_dl_buffer_volume_bits >= self.buf_high_bits
        return (hi_util and hi_buf) if self.require_both_metrics else (hi_util or hi_buf)

    def underloaded(self, s: LoadSample) -> bool:
        lo_util = s.dl_prb_utilization_percent <= self.prb_low_percent
        lo_buf = s.mac_dl_buffer_volume_bits <= self.buf_low_bits
        return (lo_util and lo_buf) if self.require_both_metrics else (lo_util or lo_buf)


@dataclass(frozen=True)
class PendingControl:
    control_id: int
    ue_id: int
    previous_ho_time_ms: Optional[int]


@dataclass
class PolicyState:
    windows: Dict[int, RollingWindow]
    ue_to_du: Dict[int, int] = field(default_factory=dict)
    last_ho_time_ms: Dict[int, int] = field(default_factory=dict)
    pending_control: Optional[PendingControl] = None
    next_control_id: int = 1

    @classmethod
    def initial(cls, config: XappConfig) -> "PolicyState":
        return cls({du: RollingWindow(config.window_ms) for du in sorted(config.du_cells)})


@dataclass(frozen=True)
class HandoverDecision:
    ue_id: int
    source_du: int
    target_du: int
    target_cell_id: int
    reason: str


def on_indication(state: PolicyState, ind: m.RicIndication) -> PolicyState:
    if ind.du_id not in state.windows:
        log.warning("indication from unknown DU %d ignored", ind.du_id)
        return state
    sample = LoadSample(
        ind.timestamp_ms,
        ind.dl_prb_utilization_percent,
        ind.mac_dl_buffer_volume_bits,
        ind.dl_throughput_bps,
    )
    state.windows[ind.du_id] = window_push(state.windows[ind.du_id], sample)
    for ue in ind.ue_metrics:
        state.ue_to_du[ue.ue_id] = ind.du_id
    return state


def _guarded(state: PolicyState, config: XappConfig, ue_id: int, now_ms: int) -> bool:
    last = state.last_ho_time_ms.get(ue_id)
    return last is not None and now_ms - last < config.ttt_ms


def _offload_target(state: PolicyState, config: XappConfig) -> Optional[int]:
    candidates = []
    for du, window in state.windows.items():
        if du == config.home_du or window.newest is None or config.overloaded(window.newest):
            continue
        candidates.append((window.newest.dl_prb_utilization_percent, config.du_cells[du], du))
    return min(candidates)[2] if candidates else None


def evaluate_policy(state: PolicyState, config: XappConfig, now_ms: int) -> Optional[HandoverDecision]:
    """Return the handover the policy asks for at ``now_ms``, if any.

    Does not modify ``state``.
    """
    if state.pending_control is not None:
        return None
    home = config.home_du
    home_window = state.windows[home]
    mobiles = sorted(config.mobile_ues)

    on_home = {ue for ue, du in state.ue_to_du.items() if du == home}
    others_on_home = on_home - config.mobile_ues
    if mobiles and set(mobiles) <= on_home and others_on_home:
        if window_sustained(home_window, config.overloaded, config.ttt_ms, config.granularity_ms):
            target = _offload_target(state, config)
            if target is not None:
                for ue in mobiles:
                    if not _guarded(state, config, ue, now_ms):
                        return HandoverDecision(ue, home, target, config.du_cells[target], OFFLOAD)

    away = [ue for ue in mobiles if ue in state.ue_to_du and state.ue_to_du[ue] != home]
    if away and window_sustained(home_window, config.underloaded, config.ttt_ms, config.granularity_ms):
        for ue in away:
            if not _guarded(state, config, ue, now_ms):
                return HandoverDecision(ue, state.ue_to_du[ue], home, config.du_cells[home], RETURN)
    return None


def make_control_request(state: PolicyState, decision: HandoverDecision, now_ms: int) -> m.RicControlRequest:
    if state.pending_control is not None:
        raise BusyError(f"control {state.pending_control.control_id} still outstanding")
    if decision.source_du == decision.target_du:
        raise ValueError("handover source and target DU are the same")
    control_id = state.next_control_id
    state.next_control_id += 1
    state.pending_control = PendingControl(
        control_id, decision.ue_id, state.last_ho_time_ms.get(decision.ue_id)
    )
    state.last_ho_time_ms[decision.ue_id] = now_ms
    return m.RicControlRequest.handover(control_id, decision.ue_id, decision.target_cell_id)


def record_control_outcome(state: PolicyState, outcome) -> PolicyState:
    pending = state.pending_control
    if pending is None or outcome.control_id != pending.control_id:
        expected = pending.control_id if pending else None
        raise ProtocolError(f"outcome for control {outcome.control_id}, expected {expected}")
    state.pending_control = None
    if isinstance(outcome, m.RicControlFailure):
        if pending.previous_ho_time_ms is None:
            state.last_ho_time_ms.pop(pending.ue_id, None)
        else:
            state.last_ho_time_ms[pending.ue_id] = pending.previous_ho_time_ms
    return state


EventSink = Callable[[str, int, dict], None]


class MlbXapp:
    """Message-driven wrapper that runs the policy against an E2 endpoint."""

    def __init__(self, config: XappConfig, endpoint, on_event: Optional[EventSink] = None):
        self.config = config
        self.endpoint = endpoint
        self.state = PolicyState.initial(config)
        self.decisions: List[HandoverDecision] = []
        self._on_event = on_event or (lambda kind, t, fields: None)
        self._next_request_id = 1
        self.now_ms = 0

    def start(self, now_ms: int = 0):
        """Subscribe to KPM reports from every known DU."""
        self.now_ms = now_ms
        for du in sorted(self.config.du_cells):
            req = m.SubscriptionRequest(self._next_request_id, du, self.config.granularity_ms)
            self._next_request_id += 1
            self.endpoint.send(req)
            self._on_event("SUBSCRIPTION", now_ms, {
                "request_id": req.request_id, "du_id": du,
                "granularity_ms": req.granularity_ms, "measurements": list(req.measurements),
            })

    def handle(self, msg, now_ms: Optional[int] = None):
        if now_ms is not None:
            self.now_ms = now_ms
        if isinstance(msg, m.RicIndication):
            self.now_ms = max(self.now_ms, msg.timestamp_ms)
            on_indication(self.state, msg)
            self._evaluate()
        elif isinstance(msg, (m.RicControlAck, m.RicControlFailure)):
            ue = self.state.pending_control.ue_id if self.state.pending_control else None
            record_control_outcome(self.state, msg)
            if isinstance(msg, m.RicControlAck):
                self._on_event("CONTROL_ACK", self.now_ms, {"control_id": msg.control_id, "ue_id": ue})
            else:
                self._on_event("CONTROL_FAILURE", self.now_ms, {
                    "control_id": msg.control_id, "ue_id": ue, "cause": msg.cause.name.lower(),
                })
        elif isinstance(msg, m.SubscriptionResponse):
            if not msg.accepted:
                log.warning("subscription %d for DU %d rejected", msg.request_id, msg.du_id)
        else:
            log.warning("xApp ignoring unexpected %s", type(msg).__name__)

    def _evaluate(self):
        decision = evaluate_policy(self.state, self.config, self.now_ms)
        if decision is None:
            return
        req = make_control_request(self.state, decision, self.now_ms)
        self.decisions.append(decision)
        self.endpoint.send(req)
        self._on_event("HO_ISSUED", self.now_ms, {
            "control_id": req.control_id, "ue_id": decision.ue_id,
            "source_du": decision.source_du, "target_du": decision.target_du,
            "target_cell_id": decision.target_cell_id, "reason": decision.reason,
        })

    def process_messages(self, now_ms: Optional[int] = None) -> int:
        handled = 0
        while True:
            msg = self.endpoint.receive()
            if msg is None:
                return handled
            self.handle(msg, now_ms)
            handled += 1
