"""Pure-Python OSC 1.0 codec.

Reference implementation; `notemotion.osc._codec` is the compiled twin with
identical behaviour, selected at import by `notemotion.osc.codec`.
"""

from __future__ import annotations

import struct

from .types import (
    INT32_MAX,
    INT32_MIN,
    MAX_BUNDLE_DEPTH,
    AddressMissingSlash,
    BadPadding,
    BadTypeTag,
    DepthLimitExceeded,
    Int32Overflow,
    NonAsciiString,
    OscBundle,
    OscMessage,
    OscPacket,
    TruncatedPacket,
    UnsupportedArgument,
)

IMPLEMENTATION = "python"

_BUNDLE_HEADER = b"#bundle\x00"


def _pad_string(s: str, what: str) -> bytes:
    try:
        raw = s.encode("ascii")
    except UnicodeEncodeError:
        raise NonAsciiString(f"{what} {s!r} is not ASCII") from None
    if "\x00" in s:
        raise NonAsciiString(f"{what} contains NUL")
    return raw + b"\x00" * (4 - len(raw) % 4)


def _encode_message(msg: OscMessage, out: bytearray):
    if not msg.address.startswith("/"):
        raise AddressMissingSlash(f"address {msg.address!r} must start with '/'")
    out += _pad_string(msg.address, "address")
    tags = ","
    payload = bytearray()
    for arg in msg.args:
        if isinstance(arg, bool):
            arg = int(arg)
        if isinstance(arg, int):
            if not INT32_MIN <= arg <= INT32_MAX:
                raise Int32Overflow(f"{arg} out of int32 range")
            tags += "i"
            payload += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags += "f"
            try:
                payload += struct.pack(">f", arg)
            except OverflowError:
                # saturate like a C double->float cast
                payload += struct.pack(">f", float("inf") if arg > 0 else float("-inf"))
        elif isinstance(arg, str):
            tags += "s"
            payload += _pad_string(arg, "string argument")
        elif isinstance(arg, (bytes, bytearray)):
            tags += "b"
            blob = bytes(arg)
            payload += struct.pack(">i", len(blob)) + blob
            payload += b"\x00" * (-len(blob) % 4)
        else:
            raise UnsupportedArgument(f"cannot encode {type(arg).__name__}")
    out += _pad_string(tags, "type tags")
    out += payload


def _encode_bundle(bundle: OscBundle, out: bytearray, depth: int):
    if depth > MAX_BUNDLE_DEPTH:
        raise DepthLimitExceeded(f"bundles nested deeper than {MAX_BUNDLE_DEPTH}")
    out += _BUNDLE_HEADER
    out += struct.pack(">Q", bundle.timetag & 0xFFFFFFFFFFFFFFFF)
    for element in bundle.elements:
        body = bytearray()
        if isinstance(element, OscBundle):
            _encode_bundle(element, body, depth + 1)
        else:
            _encode_message(element, body)
        out += struct.pack(">i", len(body))
        out += body


def encode(packet: OscPacket) -> bytes:
    """Encode a message or bundle to OSC 1.0 wire bytes (length % 4 == 0)."""
    out = bytearray()
    if isinstance(packet, OscBundle):
        _encode_bundle(packet, out, 1)
    elif isinstance(packet, OscMessage):
        _encode_message(packet, out)
    else:
        raise UnsupportedArgument(f"cannot encode {type(packet).__name__}")
    return bytes(out)


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def remaining(self) -> int:
        return len(self.data) - self.pos

    def take(self, n: int) -> bytes:
        if self.remaining() < n:
            raise TruncatedPacket(f"need {n} bytes, have {self.remaining()}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def read_string(self, what: str) -> str:
        start = self.pos
        end = self.data.find(b"\x00", start)
        if end < 0:
            raise TruncatedPacket(f"unterminated {what}")
        raw = self.data[start:end]
        consumed = end - start + 1
        padded = consumed + (-consumed % 4)
        if start + padded > len(self.data):
            raise TruncatedPacket(f"{what} padding runs past packet end")
        pad = self.data[start + consumed : start + padded]
        if pad.strip(b"\x00"):
            raise BadPadding(f"nonzero padding after {what}")
        self.pos = start + padded
        if any(b > 127 for b in raw):
            raise NonAsciiString(f"{what} is not ASCII")
        return raw.decode("ascii")

    def read_int32(self) -> int:
        return struct.unpack(">i", self.take(4))[0]

    def read_float32(self) -> float:
        return struct.unpack(">f", self.take(4))[0]

    def read_blob(self) -> bytes:
        size = self.read_int32()
        if size < 0:
            raise BadPadding(f"negative blob size {size}")
        blob = self.take(size)
        pad = self.take(-size % 4)
        if pad.strip(b"\x00"):
            raise BadPadding("nonzero padding after blob")
        return blob


def _decode_message(reader: _Reader) -> OscMessage:
    address = reader.read_string("address")
    if not address.startswith("/"):
        raise AddressMissingSlash(f"address {address!r} must start with '/'")
    tags = reader.read_string("type tag string")
    if not tags.startswith(","):
        raise BadTypeTag("type tag string missing leading ','")
    args = []
    for tag in tags[1:]:
        if tag == "i":
            args.append(reader.read_int32())
        elif tag == "f":
            args.append(reader.read_float32())
        elif tag == "s":
            args.append(reader.read_string("string argument"))
        elif tag == "b":
            args.append(reader.read_blob())
        else:
            raise BadTypeTag(f"unsupported type tag {tag!r}")
    if reader.remaining():
        raise BadPadding(f"{reader.remaining()} trailing bytes after arguments")
    return OscMessage(address, tuple(args))


def _decode_bundle(reader: _Reader, depth: int) -> OscBundle:
    if depth > MAX_BUNDLE_DEPTH:
        raise DepthLimitExceeded(f"bundles nested deeper than {MAX_BUNDLE_DEPTH}")
    reader.take(len(_BUNDLE_HEADER))  # caller checked the literal
    timetag = struct.unpack(">Q", reader.take(8))[0]
    elements = []
    while reader.remaining():
        size = reader.read_int32()
        if size < 0 or size % 4:
            raise BadPadding(f"bad bundle element size {size}")
        body = reader.take(size)
        elements.append(_decode_packet(body, depth + 1))
    return OscBundle(timetag, tuple(elements))


def _decode_packet(data: bytes, depth: int) -> OscPacket:
    if len(data) == 0:
        raise TruncatedPacket("empty packet")
    if len(data) % 4:
        raise BadPadding(f"packet length {len(data)} not a multiple of 4")
    reader = _Reader(data)
    if data.startswith(_BUNDLE_HEADER):
        return _decode_bundle(reader, depth)
    return _decode_message(reader)


def decode(data: bytes) -> OscPacket:
    """Decode OSC 1.0 wire bytes; raises OscDecodeError subclasses, never
    anything else, on arbitrary input."""
    return _decode_packet(bytes(data), 1)
