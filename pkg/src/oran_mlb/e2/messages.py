"""E2 message vocabulary: KPM subscription/indication and RC handover control."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

MEASUREMENTS = ("DL_PRB_UTILIZATION", "MAC_DL_BUFFER_VOLUME", "DL_THROUGHPUT")

RC_STYLE_CONNECTED_MODE_MOBILITY = 3
RC_ACTION_HANDOVER = 1


class MessageType(IntEnum):
    SUBSCRIPTION_REQUEST = 0x01
    SUBSCRIPTION_RESPONSE = 0x02
    INDICATION = 0x03
    CONTROL_REQUEST = 0x04
    CONTROL_ACK = 0x05
    CONTROL_FAILURE = 0x06


class FailureCause(IntEnum):
    STALE_CONTEXT = 1
    INVALID_TARGET = 2
    UNSUPPORTED = 3


@dataclass(frozen=True)
class SubscriptionRequest:
    request_id: int
    du_id: int
    granularity_ms: int
    measurements: Tuple[str, ...] = MEASUREMENTS

    def validate(self):
        if self.granularity_ms <= 0:
            raise ValueError("granularity_ms must be positive")
        unknown = set(self.measurements) - set(MEASUREMENTS)
        if unknown:
            raise ValueError(f"unregistered measurements: {sorted(unknown)}")


@dataclass(frozen=True)
class SubscriptionResponse:
    request_id: int
    du_id: int
    accepted: bool = True

    def validate(self):
        pass


@dataclass(frozen=True)
class UeMetric:
    ue_id: int
    buffer_bits: int
    throughput_bps: int


@dataclass(frozen=True)
class RicIndication:
    request_id: int
    du_id: int
    timestamp_ms: int
    dl_prb_utilization_percent: float
    mac_dl_buffer_volume_bits: int
    dl_throughput_bps: int
    ue_metrics: Tuple[UeMetric, ...] = ()

    def validate(self):
        if not 0.0 <= self.dl_prb_utilization_percent <= 100.0:
            raise ValueError("utilization out of range")
        ids = [u.ue_id for u in self.ue_metrics]
        if len(ids) != len(set(ids)):
            raise ValueError("a UE is listed twice in one indication")


@dataclass(frozen=True)
class RicControlRequest:
    control_id: int
    style: int
    action: int
    ue_id: int
    target_cell_id: int

    @classmethod
    def handover(cls, control_id: int, ue_id: int, target_cell_id: int) -> "RicControlRequest":
        return cls(control_id, RC_STYLE_CONNECTED_MODE_MOBILITY, RC_ACTION_HANDOVER,
                   ue_id, target_cell_id)

    def validate(self):
        if (self.style, self.action) != (RC_STYLE_CONNECTED_MODE_MOBILITY, RC_ACTION_HANDOVER):
            raise ValueError(f"unsupported RC style {self.style} action {self.action}")


@dataclass(frozen=True)
class RicControlAck:
    control_id: int

    def validate(self):
        pass


@dataclass(frozen=True)
class RicControlFailure:
    control_id: int
    cause: FailureCause

    def validate(self):
        FailureCause(self.cause)


E2Message = (
    SubscriptionRequest | SubscriptionResponse | RicIndication
    | RicControlRequest | RicControlAck | RicControlFailure
)
