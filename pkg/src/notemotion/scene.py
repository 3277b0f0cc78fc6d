"""Addressable scene graph: fragments, cursors and text under `/scene`.

Every node is a direct child of `/scene` with animatable attributes; all
mutation arrives as OSC-style messages through `dispatch`. A single logical
actor (the engine loop) mutates the scene; renderers and the viewer bridge
consume immutable snapshots.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional

from . import gmn, timemodel
from .gmn import GmnError, ScoreAST
from .layout import GlyphSet, StaffStyle, TimeMap, geometry_dict, layout_fragment
from .osc import AttrType, OscBundle, OscMessage, OscPacket, UncoercibleValue, coerce
from .timemodel import Transport

log = logging.getLogger(__name__)

ROOT = "/scene"
TRANSPORT_ADDRESS = "/scene/transport"

_SEGMENT_RE = re.compile(r"^[A-Za-z0-9_]+$")
_SEGMENT_PATTERN_RE = re.compile(r"^[A-Za-z0-9_*]+$")


class SceneError(Exception):
    pass


class DuplicateAddress(SceneError):
    pass


class BadAddress(SceneError):
    pass


class BadPayload(SceneError):
    pass


class UnknownAddress(SceneError):
    pass


class UnknownAttribute(SceneError):
    pass


@dataclass
class AttrSet:
    """Animatable attributes; positions are scene units, canvas = [-1,1]^2,
    y increasing downward. Angle is stored unwrapped (renderer reduces mod
    360) so ramped rotations stay monotone."""

    x: float = 0.0
    y: float = 0.0
    scale: float = 1.0
    angle: float = 0.0
    alpha: int = 255
    color: tuple[int, int, int] = (0, 0, 0)
    blur: float = 0.0
    shadow: Optional[tuple[float, float, int]] = None
    date: Fraction = Fraction(0)
    loop: int = 0

    def freeze(self) -> "AttrValues":
        return AttrValues(
            self.x, self.y, self.scale, self.angle, self.alpha,
            self.color, self.blur, self.shadow, self.date, self.loop,
        )


@dataclass(frozen=True)
class AttrValues:
    x: float
    y: float
    scale: float
    angle: float
    alpha: int
    color: tuple[int, int, int]
    blur: float
    shadow: Optional[tuple[float, float, int]]
    date: Fraction
    loop: int


def _apply_scalar(values: tuple, target: AttrType, what: str):
    if len(values) != 1:
        raise UncoercibleValue(f"{what} takes one value, got {len(values)}")
    return coerce(values[0], target)


def _apply_scale(values: tuple):
    v = _apply_scalar(values, AttrType.FLOAT, "scale")
    if v <= 0:
        raise UncoercibleValue(f"scale must be > 0, got {v}")
    return v


def _apply_blur(values: tuple):
    return max(_apply_scalar(values, AttrType.FLOAT, "blur"), 0.0)


def _apply_color(values: tuple):
    if len(values) != 3:
        raise UncoercibleValue(f"color takes r g b, got {len(values)} values")
    return tuple(coerce(v, AttrType.INT8) for v in values)


def _apply_shadow(values: tuple):
    if len(values) == 1 and isinstance(values[0], str) and values[0] in ("off", "none"):
        return None
    if len(values) != 3:
        raise UncoercibleValue("shadow takes dx dy alpha, or 'off'")
    return (
        coerce(values[0], AttrType.FLOAT),
        coerce(values[1], AttrType.FLOAT),
        coerce(values[2], AttrType.INT8),
    )


def _apply_date(values: tuple):
    if len(values) == 2:
        num = coerce(values[0], AttrType.INT)
        den = coerce(values[1], AttrType.INT)
        if den == 0:
            raise UncoercibleValue("date denominator must not be 0")
        date = Fraction(num, den)
    elif len(values) == 1:
        date = coerce(values[0], AttrType.RATIONAL)
    else:
        raise UncoercibleValue(f"date takes <num> <den> or one value, got {len(values)}")
    return date if date >= 0 else Fraction(0)


def _apply_loop(values: tuple):
    return 1 if _apply_scalar(values, AttrType.INT, "loop") else 0


# attribute verb -> value normalizer; results are already clamped/validated
ATTRIBUTES: dict[str, Callable[[tuple], object]] = {
    "x": lambda v: _apply_scalar(v, AttrType.FLOAT, "x"),
    "y": lambda v: _apply_scalar(v, AttrType.FLOAT, "y"),
    "scale": _apply_scale,
    "angle": lambda v: _apply_scalar(v, AttrType.FLOAT, "angle"),
    "alpha": lambda v: _apply_scalar(v, AttrType.INT8, "alpha"),
    "color": _apply_color,
    "blur": _apply_blur,
    "shadow": _apply_shadow,
    "date": _apply_date,
    "loop": _apply_loop,
}

# attributes a timeline ramp may target, with their numeric arity
RAMPABLE: dict[str, int] = {
    "x": 1, "y": 1, "scale": 1, "angle": 1, "alpha": 1, "blur": 1, "color": 3,
}


@dataclass(frozen=True)
class FragmentPayload:
    source: str
    ast: ScoreAST
    glyphs: GlyphSet
    timemap: TimeMap
    geometry_hash: str

    @property
    def total_duration(self) -> Fraction:
        if not self.timemap.breakpoints:
            return Fraction(0)
        return self.timemap.breakpoints[-1][0]


@dataclass(frozen=True)
class CursorSpec:
    performer_id: int
    color: tuple[int, int, int]
    target: str
    path_bend: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        xs = [x for x, _ in self.path_bend]
        if any(not 0 <= x <= 1 for x in xs):
            raise BadPayload("path_bend x values must lie in [0,1]")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise BadPayload("path_bend x values must strictly increase")


@dataclass(frozen=True)
class TextPayload:
    text: str


@dataclass
class SceneNode:
    address: str
    kind: str  # gmn-fragment | cursor-line | text
    payload: FragmentPayload | CursorSpec | TextPayload
    attrs: AttrSet = field(default_factory=AttrSet)


@dataclass(frozen=True)
class CursorView:
    """Cursor state resolved against its target at snapshot time."""

    x: float
    y: float
    active: bool
    performer_id: int
    target: str


@dataclass(frozen=True)
class NodeSnapshot:
    address: str
    kind: str
    attrs: AttrValues
    payload: FragmentPayload | CursorSpec | TextPayload
    cursor: Optional[CursorView] = None


@dataclass(frozen=True)
class SceneSnapshot:
    revision: int
    nodes: tuple[NodeSnapshot, ...]
    transport: Optional[timemodel.TransportState] = None

    def node(self, address: str) -> NodeSnapshot:
        for n in self.nodes:
            if n.address == address:
                return n
        raise KeyError(address)


@dataclass(frozen=True)
class Effect:
    address: str
    verb: str
    value: object


_KIND_ALIASES = {
    "gmn": "gmn-fragment",
    "gmn-fragment": "gmn-fragment",
    "cursor": "cursor-line",
    "cursor-line": "cursor-line",
    "txt": "text",
    "text": "text",
}


def _fragment_payload(source: str, style: StaffStyle) -> FragmentPayload:
    try:
        ast = gmn.parse(source)
    except GmnError as exc:
        raise BadPayload(f"notation rejected at {exc.line}:{exc.col}: {exc.message}") from exc
    glyphs, timemap = layout_fragment(ast, style)
    digest = hashlib.sha256(
        json.dumps(geometry_dict(glyphs, timemap), sort_keys=True).encode()
    ).hexdigest()
    return FragmentPayload(source, ast, glyphs, timemap, digest)


def _cursor_payload(args: tuple) -> CursorSpec:
    if len(args) < 5:
        raise BadPayload("cursor payload: performer r g b target [bend x y ...]")
    try:
        performer = coerce(args[0], AttrType.INT)
        color = tuple(coerce(v, AttrType.INT8) for v in args[1:4])
    except UncoercibleValue as exc:
        raise BadPayload(str(exc)) from exc
    target = args[4]
    if not isinstance(target, str) or not target.startswith("/"):
        raise BadPayload(f"cursor target must be an address, got {target!r}")
    bend_values = args[5:]
    if len(bend_values) % 2:
        raise BadPayload("path_bend needs x y pairs")
    try:
        bend = tuple(
            (coerce(bend_values[i], AttrType.FLOAT), coerce(bend_values[i + 1], AttrType.FLOAT))
            for i in range(0, len(bend_values), 2)
        )
    except UncoercibleValue as exc:
        raise BadPayload(str(exc)) from exc
    return CursorSpec(performer, color, target, bend)


class Scene:
    """Single-owner mutable scene; only the engine loop calls mutators."""

    def __init__(self, style: StaffStyle = StaffStyle()):
        self.style = style
        self.nodes: dict[str, SceneNode] = {}
        self.revision = 0
        self.applied = 0  # attribute/set/del effects successfully applied
        self.dispatch_errors = 0

    # -- addressing ---------------------------------------------------------

    def _check_address(self, address: str):
        parts = address.split("/")
        if len(parts) != 3 or parts[0] or f"/{parts[1]}" != ROOT:
            raise BadAddress(f"{address!r}: nodes live directly under {ROOT}")
        if not _SEGMENT_RE.match(parts[2]):
            raise BadAddress(f"{address!r}: segment must match [A-Za-z0-9_]+")
        if address == TRANSPORT_ADDRESS:
            raise BadAddress(f"{TRANSPORT_ADDRESS} is reserved for the transport")

    def match(self, pattern: str) -> list[str]:
        """Addresses matching the pattern; `*` wildcards within a segment."""
        if "*" not in pattern:
            return [pattern] if pattern in self.nodes else []
        parts = pattern.split("/")
        if len(parts) != 3 or parts[0] or f"/{parts[1]}" != ROOT:
            return []
        if not _SEGMENT_PATTERN_RE.match(parts[2]):
            return []
        seg_re = re.compile("^" + re.escape(parts[2]).replace(r"\*", "[A-Za-z0-9_]*") + "$")
        return [a for a in self.nodes if seg_re.match(a.split("/")[2])]

    # -- construction -------------------------------------------------------

    def create_node(self, address: str, kind: str, payload) -> SceneNode:
        self._check_address(address)
        if address in self.nodes:
            raise DuplicateAddress(address)
        return self._put_node(address, kind, payload)

    def _put_node(self, address: str, kind: str, payload) -> SceneNode:
        canonical = _KIND_ALIASES.get(kind)
        if canonical is None:
            raise BadPayload(f"unknown node kind {kind!r}")
        if canonical == "gmn-fragment":
            if not isinstance(payload, str):
                raise BadPayload("fragment payload must be notation text")
            built = _fragment_payload(payload, self.style)
        elif canonical == "cursor-line":
            if isinstance(payload, CursorSpec):
                built = payload
            else:
                built = _cursor_payload(tuple(payload))
        else:
            if not isinstance(payload, str):
                raise BadPayload("text payload must be a string")
            built = TextPayload(payload)
        existing = self.nodes.get(address)
        if existing is not None:
            node = SceneNode(address, canonical, built, existing.attrs)
        else:
            node = SceneNode(address, canonical, built)
            if canonical == "cursor-line":
                node.attrs.color = built.color
        self.nodes[address] = node
        self.revision += 1
        return node

    def delete(self, address: str):
        if address not in self.nodes:
            raise UnknownAddress(address)
        del self.nodes[address]
        self.revision += 1

    # -- attributes ----------------------------------------------------------

    def set_attr(self, address: str, key: str, value):
        """Coerce, clamp and store; returns the stored value so callers
        observe clamping."""
        node = self.nodes.get(address)
        if node is None:
            raise UnknownAddress(address)
        apply_fn = ATTRIBUTES.get(key)
        if apply_fn is None:
            raise UnknownAttribute(key)
        values = value if isinstance(value, tuple) else (value,)
        stored = apply_fn(values)
        setattr(node.attrs, key, stored)
        self.revision += 1
        return stored

    # -- dispatch ------------------------------------------------------------

    def dispatch(
        self,
        packet: OscPacket,
        transport: Optional[Transport] = None,
        reply: Optional[Callable[[list[OscMessage]], None]] = None,
    ) -> list[Effect]:
        """Apply a decoded message or bundle; returns the applied effects.

        OSC is fire-and-forget: unmatched addresses and malformed verbs are
        logged and counted, never raised.
        """
        if isinstance(packet, OscBundle):
            effects: list[Effect] = []
            for element in packet.elements:
                effects.extend(self.dispatch(element, transport, reply))
            return effects
        try:
            return self._dispatch_message(packet, transport, reply)
        except (SceneError, UncoercibleValue, ValueError) as exc:
            self.dispatch_errors += 1
            log.warning("dispatch failed for %r: %s", packet, exc)
            return []

    def _dispatch_message(self, message: OscMessage, transport, reply) -> list[Effect]:
        if message.address == TRANSPORT_ADDRESS:
            return self._dispatch_transport(message, transport)
        if not message.args or not isinstance(message.args[0], str):
            raise BadPayload("first argument must be a verb string")
        verb = message.args[0]
        values = tuple(message.args[1:])
        matched = self.match(message.address)

        if verb == "set":
            if len(values) < 2:
                raise BadPayload("set takes a kind and a payload")
            targets = matched or ([message.address] if "*" not in message.address else [])
            if not targets:
                log.info("no match for %s", message.address)
                return []
            kind = values[0]
            if not isinstance(kind, str):
                raise BadPayload("set kind must be a string")
            effects = []
            for address in targets:
                self._check_address(address)
                payload = values[1] if kind in ("gmn", "gmn-fragment", "txt", "text") else values[1:]
                self._put_node(address, kind, payload)
                self.applied += 1
                effects.append(Effect(address, "set", kind))
            return effects

        if not matched:
            log.info("no match for %s", message.address)
            return []

        if verb == "del":
            for address in matched:
                self.delete(address)
                self.applied += 1
            return [Effect(a, "del", None) for a in matched]

        if verb == "get":
            replies: list[OscMessage] = []
            for address in matched:
                replies.extend(self._get_replies(address, values))
            if reply is not None and replies:
                reply(replies)
            return [Effect(a, "get", None) for a in matched]

        if verb == "tempo":
            if transport is None:
                raise BadPayload("no transport attached; cursor tempo ignored")
            effects = []
            for address in matched:
                if self.nodes[address].kind != "cursor-line":
                    continue
                transport.set_cursor_tempo(address, _apply_scalar(values, AttrType.FLOAT, "tempo"))
                self.applied += 1
                effects.append(Effect(address, "tempo", transport.cursor_tempi[address]))
            return effects

        if verb in ATTRIBUTES:
            stored = ATTRIBUTES[verb](values)  # validate once, apply to all
            effects = []
            for address in matched:
                setattr(self.nodes[address].attrs, verb, stored)
                self.applied += 1
                effects.append(Effect(address, verb, stored))
            if effects:
                self.revision += 1
            return effects

        raise BadPayload(f"unknown verb {verb!r}")

    def _dispatch_transport(self, message: OscMessage, transport) -> list[Effect]:
        if transport is None:
            raise BadPayload("no transport attached")
        if not message.args or not isinstance(message.args[0], str):
            raise BadPayload("transport verb required")
        verb = message.args[0]
        values = message.args[1:]
        if verb == "start":
            transport.running = True
        elif verb == "stop":
            transport.running = False
        elif verb == "tempo":
            if len(values) != 1:
                raise BadPayload("tempo takes one value")
            transport.set_tempo(coerce(values[0], AttrType.FLOAT))
        elif verb == "date":
            transport.set_date(_apply_date(tuple(values)))
        else:
            raise BadPayload(f"unknown transport verb {verb!r}")
        self.applied += 1
        self.revision += 1
        return [Effect(TRANSPORT_ADDRESS, verb, values or None)]

    def _get_replies(self, address: str, values: tuple) -> list[OscMessage]:
        node = self.nodes[address]
        wanted = None
        if values:
            if not isinstance(values[0], str) or values[0] not in ATTRIBUTES:
                raise UnknownAttribute(f"get: unknown attribute {values[0]!r}")
            wanted = values[0]
        out = []
        if wanted is None:
            out.append(OscMessage(address, ("kind", node.kind)))
        for name in ATTRIBUTES if wanted is None else (wanted,):
            out.append(OscMessage(address, (name, *self._attr_wire(node, name))))
        if wanted is None and node.kind == "gmn-fragment":
            out.append(OscMessage(address, ("solmization", self._solmization_hint(node))))
        return out

    def _attr_wire(self, node: SceneNode, name: str) -> tuple:
        value = getattr(node.attrs, name)
        if name == "color":
            return value
        if name == "shadow":
            return ("off",) if value is None else value
        if name == "date":
            # informational reply: exact rationals may overflow int32
            return (float(value),)
        return (value,)

    def _solmization_hint(self, node: SceneNode) -> float:
        """Vertical displacement read as transposition: 12 staff-steps per
        staff-height, scaled by the node's own scale. Negative y (upward)
        raises pitch."""
        staff_scene = self.style.staff_height * node.attrs.scale
        if staff_scene == 0:
            return 0.0
        return -node.attrs.y * 12.0 / staff_scene

    # -- time-model hooks ----------------------------------------------------

    def cursor_nodes(self) -> Iterator[SceneNode]:
        return (n for n in self.nodes.values() if n.kind == "cursor-line")

    def fragment_duration(self, address: str) -> Optional[Fraction]:
        node = self.nodes.get(address)
        if node is None or node.kind != "gmn-fragment":
            return None
        return node.payload.total_duration

    # -- snapshots -----------------------------------------------------------

    def snapshot(self, transport: Optional[Transport] = None) -> SceneSnapshot:
        """Deep, consistent, immutable copy; later mutations do not affect it."""
        nodes = []
        for node in self.nodes.values():
            cursor = None
            if node.kind == "cursor-line":
                cursor = self._resolve_cursor(node)
            nodes.append(
                NodeSnapshot(node.address, node.kind, node.attrs.freeze(), node.payload, cursor)
            )
        return SceneSnapshot(
            revision=self.revision,
            nodes=tuple(nodes),
            transport=transport.state() if transport is not None else None,
        )

    def _resolve_cursor(self, node: SceneNode) -> CursorView:
        spec: CursorSpec = node.payload
        target = self.nodes.get(spec.target)
        if target is None or target.kind != "gmn-fragment":
            return CursorView(0.0, 0.0, False, spec.performer_id, spec.target)
        payload: FragmentPayload = target.payload
        date = node.attrs.date
        x, y = timemodel.cursor_position(spec, date, payload.timemap, payload.glyphs.width)
        active = Fraction(0) <= date <= payload.total_duration
        return CursorView(x, y, active, spec.performer_id, spec.target)

