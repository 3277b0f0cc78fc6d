"""OSC 1.0 packet types and codec/transport error classes.

Wire invariants: addresses and strings are ASCII, NUL-terminated and
zero-padded to 4-byte boundaries; int32/float32 are big-endian; a bundle
starts with the literal ``#bundle`` and a 64-bit NTP-style timetag where the
value 1 means "immediately".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

IMMEDIATELY = 1

# seconds between the NTP epoch (1900) and the Unix epoch (1970)
NTP_UNIX_OFFSET = 2_208_988_800

MAX_BUNDLE_DEPTH = 16

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1


class OscError(Exception):
    pass


class OscEncodeError(OscError):
    pass


class OscDecodeError(OscError):
    pass


class NonAsciiString(OscEncodeError, OscDecodeError):
    """String or address contains bytes outside 7-bit ASCII."""


class AddressMissingSlash(OscEncodeError, OscDecodeError):
    pass


class Int32Overflow(OscEncodeError):
    pass


class UnsupportedArgument(OscEncodeError):
    """Argument is not one of the OSC 1.0 types int32/float32/string/blob."""


class TruncatedPacket(OscDecodeError):
    pass


class BadTypeTag(OscDecodeError):
    pass


class BadPadding(OscDecodeError):
    pass


class DepthLimitExceeded(OscDecodeError):
    pass


class UncoercibleValue(OscError):
    """Value cannot be converted to the target attribute type."""


class PortInUse(OscError):
    pass


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class OscBundle:
    timetag: int = IMMEDIATELY
    elements: tuple = ()

    def __post_init__(self):
        if not isinstance(self.elements, tuple):
            object.__setattr__(self, "elements", tuple(self.elements))


OscPacket = Union[OscMessage, OscBundle]


def timetag_from_unix(unix_seconds: float) -> int:
    """Unix wall time -> 32.32 fixed-point NTP timetag."""
    ntp = unix_seconds + NTP_UNIX_OFFSET
    seconds = int(ntp)
    frac = int((ntp - seconds) * (1 << 32))
    return (seconds << 32) | (frac & 0xFFFFFFFF)


def unix_from_timetag(timetag: int) -> float:
    """32.32 fixed-point NTP timetag -> Unix wall time."""
    seconds = timetag >> 32
    frac = timetag & 0xFFFFFFFF
    return (seconds - NTP_UNIX_OFFSET) + frac / (1 << 32)
