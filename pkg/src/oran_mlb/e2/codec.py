"""Fixed-order big-endian framing for E2 messages.

A frame is ``u32 length | u8 type | body`` where ``length`` counts the type
byte and the body. Body fields follow declaration order: integers are
fixed-width big-endian, reals IEEE-754 doubles, strings ``u16 length +
UTF-8``, lists ``u16 count + elements``.
"""

from __future__ import annotations

import struct

from . import messages as m

_LEN = struct.Struct(">I")


class E2Error(Exception):
    pass


class EncodeError(E2Error):
    pass


class DecodeError(E2Error):
    pass


class IncompleteFrameError(DecodeError):
    pass


class UnsupportedError(DecodeError):
    """Unknown message type or unsupported RC service style/action.

    ``control_id`` is set when the offending frame was a control request,
    so the receiver can still answer with a failure.
    """

    def __init__(self, msg, control_id=None):
        super().__init__(msg)
        self.control_id = control_id


class DisconnectedError(E2Error):
    pass


class _Writer:
    def __init__(self):
        self.parts = []

    def put(self, fmt, value):
        try:
            self.parts.append(struct.pack(">" + fmt, value))
        except struct.error as exc:
            raise EncodeError(f"value {value!r} does not fit '{fmt}': {exc}") from None

    def string(self, text):
        raw = text.encode("utf-8")
        self.put("H", len(raw))
        self.parts.append(raw)

    def count(self, items):
        self.put("H", len(items))

    def getvalue(self):
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def get(self, fmt):
        size = struct.calcsize(">" + fmt)
        if self.pos + size > len(self.data):
            raise IncompleteFrameError("message body truncated")
        (value,) = struct.unpack_from(">" + fmt, self.data, self.pos)
        self.pos += size
        return value

    def string(self):
        n = self.get("H")
        if self.pos + n > len(self.data):
            raise IncompleteFrameError("string truncated")
        raw = self.data[self.pos:self.pos + n]
        self.pos += n
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError(f"invalid UTF-8 string: {exc}") from None


def _encode_body(msg, w: _Writer) -> int:
    if isinstance(msg, m.SubscriptionRequest):
        w.put("I", msg.request_id)
        w.put("I", msg.du_id)
        w.put("I", msg.granularity_ms)
        w.count(msg.measurements)
        for name in msg.measurements:
            w.string(name)
        return m.MessageType.SUBSCRIPTION_REQUEST
    if isinstance(msg, m.SubscriptionResponse):
        w.put("I", msg.request_id)
        w.put("I", msg.du_id)
        w.put("B", 1 if msg.accepted else 0)
        return m.MessageType.SUBSCRIPTION_RESPONSE
    if isinstance(msg, m.RicIndication):
        w.put("I", msg.request_id)
        w.put("I", msg.du_id)
        w.put("Q", msg.timestamp_ms)
        w.put("d", msg.dl_prb_utilization_percent)
        w.put("Q", msg.mac_dl_buffer_volume_bits)
        w.put("Q", msg.dl_throughput_bps)
        w.count(msg.ue_metrics)
        for ue in msg.ue_metrics:
            w.put("I", ue.ue_id)
            w.put("Q", ue.buffer_bits)
            w.put("Q", ue.throughput_bps)
        return m.MessageType.INDICATION
    if isinstance(msg, m.RicControlRequest):
        w.put("I", msg.control_id)
        w.put("B", msg.style)
        w.put("B", msg.action)
        w.put("I", msg.ue_id)
        w.put("I", msg.target_cell_id)
        return m.MessageType.CONTROL_REQUEST
    if isinstance(msg, m.RicControlAck):
        w.put("I", msg.control_id)
        return m.MessageType.CONTROL_ACK
    if isinstance(msg, m.RicControlFailure):
        w.put("I", msg.control_id)
        w.put("B", int(msg.cause))
        return m.MessageType.CONTROL_FAILURE
    raise EncodeError(f"not an E2 message: {type(msg).__name__}")


def encode_message(msg) -> bytes:
    try:
        msg.validate()
    except (ValueError, AttributeError) as exc:
        raise EncodeError(str(exc)) from None
    w = _Writer()
    kind = _encode_body(msg, w)
    body = w.getvalue()
    return _LEN.pack(len(body) + 1) + bytes([kind]) + body


def frame_length(buf: bytes) -> int | None:
    """Total size of the first frame in ``buf``, or None if the header is incomplete."""
    if len(buf) < _LEN.size:
        return None
    return _LEN.size + _LEN.unpack_from(buf)[0]


def decode_message(data: bytes):
    data = bytes(data)
    total = frame_length(data)
    if total is None:
        raise IncompleteFrameError("frame header truncated")
    if total == _LEN.size:
        raise DecodeError("frame has no type byte")
    if len(data) < total:
        raise IncompleteFrameError(f"frame needs {total} bytes, got {len(data)}")
    if len(data) > total:
        raise DecodeError(f"{len(data) - total} trailing bytes after frame")
    kind = data[_LEN.size]
    r = _Reader(data[_LEN.size + 1:])
    msg = _decode_body(kind, r)
    if r.pos != len(r.data):
        raise DecodeError("frame length disagrees with message body")
    return msg


def _decode_body(kind: int, r: _Reader):
    if kind == m.MessageType.SUBSCRIPTION_REQUEST:
        request_id, du_id, granularity = r.get("I"), r.get("I"), r.get("I")
        names = tuple(r.string() for _ in range(r.get("H")))
        return m.SubscriptionRequest(request_id, du_id, granularity, names)
    if kind == m.MessageType.SUBSCRIPTION_RESPONSE:
        return m.SubscriptionResponse(r.get("I"), r.get("I"), bool(r.get("B")))
    if kind == m.MessageType.INDICATION:
        head = (r.get("I"), r.get("I"), r.get("Q"), r.get("d"), r.get("Q"), r.get("Q"))
        ues = tuple(m.UeMetric(r.get("I"), r.get("Q"), r.get("Q")) for _ in range(r.get("H")))
        return m.RicIndication(*head, ues)
    if kind == m.MessageType.CONTROL_REQUEST:
        msg = m.RicControlRequest(r.get("I"), r.get("B"), r.get("B"), r.get("I"), r.get("I"))
        try:
            msg.validate()
        except ValueError as exc:
            raise UnsupportedError(str(exc), control_id=msg.control_id) from None
        return msg
    if kind == m.MessageType.CONTROL_ACK:
        return m.RicControlAck(r.get("I"))
    if kind == m.MessageType.CONTROL_FAILURE:
        control_id, cause = r.get("I"), r.get("B")
        try:
            return m.RicControlFailure(control_id, m.FailureCause(cause))
        except ValueError:
            raise DecodeError(f"unknown failure cause {cause}") from None
    raise UnsupportedError(f"unknown message type 0x{kind:02X}")
