"""UDP transport: a threaded OSC listener feeding an ordered message queue.

Every datagram is decoded and enqueued with its arrival timestamp; bundles
with future timetags are held back and dispatched when due (1 ms scheduling
granularity). Decode errors are counted and logged, never fatal.
"""

from __future__ import annotations

import errno
import heapq
import itertools
import logging
import queue
import select
import socket
import threading
import time
from dataclasses import dataclass, field

from .codec import decode, encode
from .types import (
    IMMEDIATELY,
    OscBundle,
    OscDecodeError,
    OscMessage,
    OscPacket,
    PortInUse,
    unix_from_timetag,
)

log = logging.getLogger(__name__)

DEFAULT_PORT = 7000
DEFAULT_REPLY_PORT = 7001

# deferred-bundle scheduling granularity, seconds
_TICK = 0.001


@dataclass(frozen=True)
class QueuedMessage:
    message: OscMessage
    received_at: float  # time.monotonic() at datagram arrival
    source: tuple[str, int] | None = None


@dataclass
class ServerStats:
    received: int = 0
    enqueued: int = 0
    decode_errors: int = 0
    deferred: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class OscServer:
    """Listens on UDP, decodes packets, enqueues messages in arrival order."""

    def __init__(self, port: int = DEFAULT_PORT, host: str = "127.0.0.1",
                 sink: queue.SimpleQueue | None = None):
        self.sink: queue.SimpleQueue[QueuedMessage] = sink if sink is not None else queue.SimpleQueue()
        self.stats = ServerStats()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self._sock.bind((host, port))
        except OSError as exc:
            self._sock.close()
            if exc.errno in (errno.EADDRINUSE, errno.EACCES):
                raise PortInUse(f"UDP port {port} unavailable: {exc}") from exc
            raise
        self.host, self.port = self._sock.getsockname()
        self._deferred: list[tuple[float, int, OscPacket, tuple[str, int]]] = []
        self._seq = itertools.count()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> "OscServer":
        self._thread = threading.Thread(target=self._run, name="osc-listener", daemon=True)
        self._thread.start()
        return self

    def _run(self):
        sock = self._sock
        while not self._stop.is_set():
            timeout = _TICK if self._deferred else 0.2
            try:
                readable, _, _ = select.select([sock], [], [], timeout)
            except (OSError, ValueError):
                break  # socket closed under us during shutdown
            now = time.monotonic()
            if readable:
                try:
                    data, source = sock.recvfrom(65536)
                except OSError:
                    break
                self.stats.received += 1
                try:
                    packet = decode(data)
                except OscDecodeError as exc:
                    self.stats.decode_errors += 1
                    log.warning("undecodable datagram from %s: %s (%d bytes)", source, exc, len(data))
                else:
                    self._dispatch(packet, source, now)
            self._flush_deferred(time.monotonic())

    def _dispatch(self, packet: OscPacket, source, now: float):
        if isinstance(packet, OscMessage):
            self.sink.put(QueuedMessage(packet, now, source))
            self.stats.enqueued += 1
            return
        due = self._bundle_due(packet)
        if due > now:
            heapq.heappush(self._deferred, (due, next(self._seq), packet, source))
            self.stats.deferred += 1
            return
        for element in packet.elements:
            self._dispatch(element, source, now)

    def _bundle_due(self, bundle: OscBundle) -> float:
        """Due time on the monotonic clock; past and immediate dispatch now."""
        if bundle.timetag == IMMEDIATELY:
            return 0.0
        wall = unix_from_timetag(bundle.timetag)
        delay = wall - time.time()
        if delay <= 0:
            return 0.0
        return time.monotonic() + delay

    def _flush_deferred(self, now: float):
        while self._deferred and self._deferred[0][0] <= now:
            _, _, packet, source = heapq.heappop(self._deferred)
            for element in packet.elements:
                self._dispatch(element, source, now)

    def stop(self):
        """Idempotent shutdown: stops the thread and closes the socket."""
        if self._stop.is_set():
            return
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._thread is not None and self._thread.is_alive():
            self._thread.join(timeout=2.0)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


class UdpSender:
    """Fire-and-forget OSC sender used for `get` replies and cmd_play."""

    def __init__(self):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, packet: OscPacket, host: str, port: int):
        self._sock.sendto(encode(packet), (host, port))

    def close(self):
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
