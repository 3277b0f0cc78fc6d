"""Rational musical time: transport, per-cursor tempi, cursor positioning.

Dates are exact `Fraction`s in whole-note units; a tempo of `q` quarter
notes per minute advances a date by q*dt/240 whole notes over dt seconds.
Floats entering the model are converted to their exact binary fractions, so
repeated ticking accumulates no drift and tick is exactly additive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .layout import TimeMap, x_at_date

Numeric = int | float | Fraction

DEFAULT_TEMPO = Fraction(60)

# seconds per minute times quarters per whole note
_QPM_DIVISOR = 240


class DanglingTarget(Exception):
    """Cursor's target fragment no longer exists."""


def _fraction(value: Numeric, what: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"bad {what}: {value!r}") from exc


@dataclass
class Transport:
    """Master clock plus optional per-cursor tempo overrides."""

    running: bool = False
    tempo: Fraction = DEFAULT_TEMPO
    date: Fraction = Fraction(0)
    cursor_tempi: dict[str, Fraction] = field(default_factory=dict)

    def set_tempo(self, qpm: Numeric):
        qpm = _fraction(qpm, "tempo")
        if qpm <= 0:
            raise ValueError(f"tempo must be positive, got {qpm}")
        self.tempo = qpm

    def set_date(self, date: Numeric):
        date = _fraction(date, "date")
        if date < 0:
            raise ValueError(f"date must be >= 0, got {date}")
        self.date = date

    def set_cursor_tempo(self, address: str, qpm: Numeric):
        qpm = _fraction(qpm, "tempo")
        if qpm <= 0:
            raise ValueError(f"tempo must be positive, got {qpm}")
        self.cursor_tempi[address] = qpm

    def effective_tempo(self, address: Optional[str] = None) -> Fraction:
        if address is not None and address in self.cursor_tempi:
            return self.cursor_tempi[address]
        return self.tempo

    def advance(self, tempo: Fraction, dt: Fraction) -> Fraction:
        return tempo * dt / _QPM_DIVISOR

    def state(self) -> "TransportState":
        return TransportState(self.running, self.tempo, self.date, tuple(sorted(self.cursor_tempi.items())))


@dataclass(frozen=True)
class TransportState:
    running: bool
    tempo: Fraction
    date: Fraction
    cursor_tempi: tuple[tuple[str, Fraction], ...] = ()


def tick(transport: Transport, dt: Numeric, scene=None):
    """Advance every running date by tempo * dt / 240 whole notes.

    When a scene is supplied, each cursor node's date attribute advances at
    its own effective tempo; a cursor with loop set wraps at its target
    fragment's total duration, otherwise it runs past the end and the
    snapshot marks it inactive.
    """
    dt = _fraction(dt, "dt")
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if not transport.running or dt == 0:
        return
    transport.date += transport.advance(transport.tempo, dt)
    if scene is None:
        return
    for node in scene.cursor_nodes():
        tempo = transport.effective_tempo(node.address)
        node.attrs.date += transport.advance(tempo, dt)
        if node.attrs.loop:
            total = scene.fragment_duration(node.payload.target)
            if total and total > 0:
                node.attrs.date %= total


def phase_offset(transport: Transport, cursor_a: str, cursor_b: str, t: Numeric) -> Fraction:
    """Date lead of cursor_a over cursor_b after t seconds from a common start."""
    t = _fraction(t, "time")
    ta = transport.effective_tempo(cursor_a)
    tb = transport.effective_tempo(cursor_b)
    return (ta - tb) * t / _QPM_DIVISOR


def bend_offset(path_bend: tuple[tuple[float, float], ...], x_norm: float) -> float:
    """Piecewise-linear y offset of a bent cursor path at normalized x."""
    if not path_bend:
        return 0.0
    if x_norm <= path_bend[0][0]:
        return path_bend[0][1]
    if x_norm >= path_bend[-1][0]:
        return path_bend[-1][1]
    for (x0, y0), (x1, y1) in zip(path_bend, path_bend[1:]):
        if x0 <= x_norm <= x1:
            if x1 == x0:
                return y1
            t = (x_norm - x0) / (x1 - x0)
            return y0 + t * (y1 - y0)
    return path_bend[-1][1]


def cursor_position(
    cursor, date: Fraction, timemap: TimeMap, fragment_width: float
) -> tuple[float, float]:
    """Fragment-local anchor of a cursor line at the given date.

    x follows the target's time map; y is the bend offset at normalized x
    (0 for a straight playhead, which spans the full staff height).
    """
    x = x_at_date(timemap, date)
    x_norm = x / fragment_width if fragment_width > 0 else 0.0
    y = bend_offset(tuple(cursor.path_bend), x_norm)
    return (x, y)
