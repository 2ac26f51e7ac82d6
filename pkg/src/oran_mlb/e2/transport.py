"""Endpoints that carry encoded E2 frames between RAN and xApp.

Every message is encoded on ``send`` and decoded on ``receive``, so the
codec runs on each exchange. ``receive`` returns None when nothing is
waiting.
"""

from __future__ import annotations

import collections
import socket
import threading

from .codec import DisconnectedError, IncompleteFrameError, decode_message, encode_message, frame_length


class LoopbackEndpoint:
    def __init__(self):
        self._inbox = collections.deque()
        self._peer = None
        self.closed = False

    def send(self, msg):
        self.send_raw(encode_message(msg))

    def send_raw(self, frame: bytes):
        if self.closed or self._peer is None or self._peer.closed:
            raise DisconnectedError("E2 peer is closed")
        self._peer._inbox.append(bytes(frame))

    def receive(self):
        if self._inbox:
            return decode_message(self._inbox.popleft())
        if self._peer is None or self._peer.closed:
            raise DisconnectedError("E2 peer is closed")
        return None

    def pending(self) -> int:
        return len(self._inbox)

    def close(self):
        self.closed = True


def loopback_pair():
    """Two connected in-process endpoints, (ran_side, ric_side)."""
    a, b = LoopbackEndpoint(), LoopbackEndpoint()
    a._peer, b._peer = b, a
    return a, b


class StreamEndpoint:
    """The same frames over a connected stream socket.

    ``receive(block=False)`` returns None if no complete frame has arrived.
    """

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._buf = bytearray()
        self._lock = threading.Lock()
        self._eof = False

    def send(self, msg):
        self.send_raw(encode_message(msg))

    def send_raw(self, frame: bytes):
        try:
            with self._lock:
                self.sock.sendall(frame)
        except OSError as exc:
            raise DisconnectedError(f"E2 peer is closed: {exc}") from None

    def _take_frame(self):
        total = frame_length(self._buf)
        if total is None or len(self._buf) < total:
            return None
        frame = bytes(self._buf[:total])
        del self._buf[:total]
        return frame

    def receive(self, block: bool = True, timeout: float | None = None):
        self.sock.settimeout(timeout if block else 0.0)
        while True:
            frame = self._take_frame()
            if frame is not None:
                return decode_message(frame)
            if self._eof:
                if self._buf:
                    raise IncompleteFrameError("stream closed mid-frame")
                raise DisconnectedError("E2 peer is closed")
            try:
                chunk = self.sock.recv(65536)
            except (BlockingIOError, socket.timeout):
                return None
            if not chunk:
                self._eof = True
            self._buf.extend(chunk)

    def close(self):
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()
