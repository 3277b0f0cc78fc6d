"""OSC 1.0 codec and UDP transport (the engine's wire interface)."""

from .codec import IMPLEMENTATION, available_implementations, decode, encode
from .coerce import AttrType, coerce, round_half_away
from .server import (
    DEFAULT_PORT,
    DEFAULT_REPLY_PORT,
    OscServer,
    QueuedMessage,
    UdpSender,
)
from .types import (
    IMMEDIATELY,
    AddressMissingSlash,
    BadPadding,
    BadTypeTag,
    DepthLimitExceeded,
    Int32Overflow,
    NonAsciiString,
    OscBundle,
    OscDecodeError,
    OscEncodeError,
    OscError,
    OscMessage,
    OscPacket,
    PortInUse,
    TruncatedPacket,
    UncoercibleValue,
    UnsupportedArgument,
    timetag_from_unix,
    unix_from_timetag,
)

__all__ = [
    "IMPLEMENTATION",
    "IMMEDIATELY",
    "AddressMissingSlash",
    "AttrType",
    "BadPadding",
    "BadTypeTag",
    "DEFAULT_PORT",
    "DEFAULT_REPLY_PORT",
    "DepthLimitExceeded",
    "Int32Overflow",
    "NonAsciiString",
    "OscBundle",
    "OscDecodeError",
    "OscEncodeError",
    "OscError",
    "OscMessage",
    "OscPacket",
    "OscServer",
    "PortInUse",
    "QueuedMessage",
    "TruncatedPacket",
    "UdpSender",
    "UncoercibleValue",
    "UnsupportedArgument",
    "available_implementations",
    "coerce",
    "decode",
    "encode",
    "round_half_away",
    "timetag_from_unix",
    "unix_from_timetag",
]
