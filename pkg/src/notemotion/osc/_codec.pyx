# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled OSC 1.0 codec: behaviourally identical to codec_py, faster.

Selected at import by notemotion.osc.codec when built; the pure-Python
module remains the fallback and the behavioural reference.
"""

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_GET_SIZE

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
    TruncatedPacket,
    UnsupportedArgument,
)

IMPLEMENTATION = "compiled"

cdef bytes _BUNDLE_HEADER = b"#bundle\x00"
cdef int _MAX_DEPTH = MAX_BUNDLE_DEPTH


cdef union _f32:
    unsigned int u
    float f


cdef inline void _put_u32(bytearray out, unsigned int v):
    out.append((v >> 24) & 0xFF)
    out.append((v >> 16) & 0xFF)
    out.append((v >> 8) & 0xFF)
    out.append(v & 0xFF)


cdef bytes _pad_string(s, what):
    cdef bytes raw
    try:
        raw = s.encode("ascii")
    except UnicodeEncodeError:
        raise NonAsciiString(f"{what} {s!r} is not ASCII") from None
    if b"\x00" in raw:
        raise NonAsciiString(f"{what} contains NUL")
    return raw + b"\x00" * (4 - len(raw) % 4)


cdef void _encode_message(msg, bytearray out) except *:
    cdef long long iv
    cdef _f32 fv
    cdef bytes blob
    if not msg.address.startswith("/"):
        raise AddressMissingSlash(f"address {msg.address!r} must start with '/'")
    out += _pad_string(msg.address, "address")
    tags = ","
    cdef bytearray payload = bytearray()
    for arg in msg.args:
        if isinstance(arg, bool):
            arg = int(arg)
        if isinstance(arg, int):
            if arg < INT32_MIN or arg > INT32_MAX:
                raise Int32Overflow(f"{arg} out of int32 range")
            iv = arg
            tags += "i"
            _put_u32(payload, <unsigned int> (<unsigned long long> iv & 0xFFFFFFFFULL))
        elif isinstance(arg, float):
            tags += "f"
            fv.f = <float> (<double> arg)
            _put_u32(payload, fv.u)
        elif isinstance(arg, str):
            tags += "s"
            payload += _pad_string(arg, "string argument")
        elif isinstance(arg, (bytes, bytearray)):
            blob = bytes(arg)
            tags += "b"
            _put_u32(payload, <unsigned int> len(blob))
            payload += blob
            payload += b"\x00" * ((-len(blob)) % 4)
        else:
            raise UnsupportedArgument(f"cannot encode {type(arg).__name__}")
    out += _pad_string(tags, "type tags")
    out += payload


cdef void _encode_bundle(bundle, bytearray out, int depth) except *:
    cdef bytearray body
    cdef unsigned long long tt
    if depth > _MAX_DEPTH:
        raise DepthLimitExceeded(f"bundles nested deeper than {_MAX_DEPTH}")
    out += _BUNDLE_HEADER
    tt = <unsigned long long> (bundle.timetag & 0xFFFFFFFFFFFFFFFF)
    _put_u32(out, <unsigned int> (tt >> 32))
    _put_u32(out, <unsigned int> (tt & 0xFFFFFFFFULL))
    for element in bundle.elements:
        body = bytearray()
        if isinstance(element, OscBundle):
            _encode_bundle(element, body, depth + 1)
        else:
            _encode_message(element, body)
        _put_u32(out, <unsigned int> len(body))
        out += body


def encode(packet):
    """Encode a message or bundle to OSC 1.0 wire bytes (length % 4 == 0)."""
    cdef bytearray out = bytearray()
    if isinstance(packet, OscBundle):
        _encode_bundle(packet, out, 1)
    elif isinstance(packet, OscMessage):
        _encode_message(packet, out)
    else:
        raise UnsupportedArgument(f"cannot encode {type(packet).__name__}")
    return bytes(out)


cdef class _Reader:
    cdef bytes data
    cdef const unsigned char* buf
    cdef Py_ssize_t pos
    cdef Py_ssize_t size

    def __cinit__(self, bytes data):
        self.data = data
        self.buf = <const unsigned char*> PyBytes_AS_STRING(data)
        self.pos = 0
        self.size = PyBytes_GET_SIZE(data)

    cdef inline Py_ssize_t remaining(self):
        return self.size - self.pos

    cdef void need(self, Py_ssize_t n) except *:
        if self.size - self.pos < n:
            raise TruncatedPacket(f"need {n} bytes, have {self.size - self.pos}")

    cdef str read_string(self, what) except *:
        cdef Py_ssize_t start = self.pos
        cdef Py_ssize_t end = start
        cdef Py_ssize_t consumed, padded, i
        cdef bint ascii_ok = True
        while end < self.size and self.buf[end] != 0:
            if self.buf[end] > 127:
                ascii_ok = False
            end += 1
        if end >= self.size:
            raise TruncatedPacket(f"unterminated {what}")
        consumed = end - start + 1
        padded = consumed + ((-consumed) % 4)
        if start + padded > self.size:
            raise TruncatedPacket(f"{what} padding runs past packet end")
        for i in range(start + consumed, start + padded):
            if self.buf[i] != 0:
                raise BadPadding(f"nonzero padding after {what}")
        self.pos = start + padded
        if not ascii_ok:
            raise NonAsciiString(f"{what} is not ASCII")
        return self.data[start:end].decode("ascii")

    cdef int read_int32(self) except? -12345:
        cdef unsigned int u
        self.need(4)
        u = (<unsigned int> self.buf[self.pos] << 24) | \
            (<unsigned int> self.buf[self.pos + 1] << 16) | \
            (<unsigned int> self.buf[self.pos + 2] << 8) | \
            (<unsigned int> self.buf[self.pos + 3])
        self.pos += 4
        return <int> u

    cdef double read_float32(self) except *:
        cdef _f32 v
        self.need(4)
        v.u = (<unsigned int> self.buf[self.pos] << 24) | \
              (<unsigned int> self.buf[self.pos + 1] << 16) | \
              (<unsigned int> self.buf[self.pos + 2] << 8) | \
              (<unsigned int> self.buf[self.pos + 3])
        self.pos += 4
        return <double> v.f

    cdef bytes read_blob(self) except *:
        cdef int size = self.read_int32()
        cdef Py_ssize_t i, pad
        if size < 0:
            raise BadPadding(f"negative blob size {size}")
        self.need(size)
        blob = self.data[self.pos : self.pos + size]
        self.pos += size
        pad = (-<Py_ssize_t> size) % 4
        self.need(pad)
        for i in range(self.pos, self.pos + pad):
            if self.buf[i] != 0:
                raise BadPadding("nonzero padding after blob")
        self.pos += pad
        return blob


cdef object _decode_message(_Reader reader):
    cdef str address = reader.read_string("address")
    if not address.startswith("/"):
        raise AddressMissingSlash(f"address {address!r} must start with '/'")
    cdef str tags = reader.read_string("type tag string")
    if not tags.startswith(","):
        raise BadTypeTag("type tag string missing leading ','")
    args = []
    cdef Py_ssize_t i
    cdef Py_UCS4 tag
    for i in range(1, len(tags)):
        tag = tags[i]
        if tag == u"i":
            args.append(reader.read_int32())
        elif tag == u"f":
            args.append(reader.read_float32())
        elif tag == u"s":
            args.append(reader.read_string("string argument"))
        elif tag == u"b":
            args.append(reader.read_blob())
        else:
            raise BadTypeTag(f"unsupported type tag {chr(tag)!r}")
    if reader.remaining():
        raise BadPadding(f"{reader.remaining()} trailing bytes after arguments")
    return OscMessage(address, tuple(args))


cdef object _decode_bundle(_Reader reader, int depth):
    cdef unsigned long long timetag
    cdef int size
    if depth > _MAX_DEPTH:
        raise DepthLimitExceeded(f"bundles nested deeper than {_MAX_DEPTH}")
    reader.pos += 8  # "#bundle\0", checked by caller
    reader.need(8)
    timetag = 0
    for _ in range(8):
        timetag = (timetag << 8) | reader.buf[reader.pos]
        reader.pos += 1
    elements = []
    while reader.remaining():
        size = reader.read_int32()
        if size < 0 or size % 4:
            raise BadPadding(f"bad bundle element size {size}")
        reader.need(size)
        body = reader.data[reader.pos : reader.pos + size]
        reader.pos += size
        elements.append(_decode_packet(body, depth + 1))
    return OscBundle(timetag, tuple(elements))


cdef object _decode_packet(bytes data, int depth):
    if len(data) == 0:
        raise TruncatedPacket("empty packet")
    if len(data) % 4:
        raise BadPadding(f"packet length {len(data)} not a multiple of 4")
    cdef _Reader reader = _Reader(data)
    if data.startswith(_BUNDLE_HEADER):
        return _decode_bundle(reader, depth)
    return _decode_message(reader)


def decode(data):
    """Decode OSC 1.0 wire bytes; raises OscDecodeError subclasses, never
    anything else, on arbitrary input."""
    return _decode_packet(bytes(data), 1)
