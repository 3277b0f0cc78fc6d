"""Fragment layout: ScoreAST -> positioned vector glyphs + date->x map.

Spacing is time-proportional: event x = prefix_width + (date / total) *
(width - prefix_width). One 5-line staff per voice, stacked vertically.
Coordinates are fragment-local: x in [0, width], y in [0, height], y down.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction

from .gmn import ScoreAST, Voice, diatonic_step, total_duration

Matrix = tuple[float, float, float, float, float, float]  # SVG order a b c d e f


@dataclass(frozen=True)
class Line:
    x1: float
    y1: float
    x2: float
    y2: float
    thickness: float = 0.0  # 0 means hairline, renderer picks minimum


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    rx: float
    ry: float
    filled: bool = True


@dataclass(frozen=True)
class PolyPath:
    points: tuple[tuple[float, float], ...]
    closed: bool = False
    filled: bool = False


@dataclass(frozen=True)
class TextLabel:
    x: float
    y: float  # baseline
    text: str
    size: float
    italic: bool = False


Shape = Line | Ellipse | PolyPath | TextLabel


@dataclass(frozen=True)
class Glyph:
    kind: str  # staff-line | notehead | stem | rest | text | barline
    shape: Shape


@dataclass(frozen=True)
class GlyphSet:
    glyphs: tuple[Glyph, ...]
    width: float
    height: float


@dataclass(frozen=True)
class TimeMap:
    """Monotone piecewise-linear date -> x mapping; dates strictly increase."""

    breakpoints: tuple[tuple[Fraction, float], ...]


@dataclass(frozen=True)
class StaffStyle:
    width: float = 1.0
    staff_height: float = 0.06  # vertical span of the 5 lines
    prefix_width: float = 0.1  # clef/meter region, mapped to date 0

    @property
    def gap(self) -> float:
        return self.staff_height / 4

    @property
    def band_height(self) -> float:
        # one staff_height of air above and below the staff
        return 3 * self.staff_height


# bottom staff line reference per clef: (pitch_class, octave) sitting on it
_CLEF_BOTTOM_LINE = {
    "treble": ("e", 1),
    "alto": ("f", 0),
    "bass": ("g", -1),
}

_CLEF_SYMBOL = {"treble": "\U0001d11e", "alto": "\U0001d121", "bass": "\U0001d122"}

_CLEF_ALIASES = {
    "treble": "treble", "g": "treble", "g2": "treble", "violin": "treble",
    "alto": "alto", "c": "alto", "c3": "alto",
    "bass": "bass", "f": "bass", "f4": "bass",
}


def _voice_clef(voice: Voice) -> str:
    for _, tag in voice.tags:
        if tag.name == "clef" and tag.argument:
            return _CLEF_ALIASES.get(tag.argument.strip().lower(), "treble")
    return "treble"


def _meter_duration(voice: Voice) -> Fraction | None:
    """Measure length in whole notes, from the first meter tag if parseable."""
    for _, tag in voice.tags:
        if tag.name == "meter" and tag.argument and "/" in tag.argument:
            num, _, den = tag.argument.partition("/")
            try:
                return Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError):
                return None
    return None


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


class _VoiceLayout:
    """Places one voice's glyphs inside its horizontal band."""

    def __init__(self, style: StaffStyle, band_top: float, clef: str):
        self.style = style
        self.band_top = band_top
        self.staff_top = band_top + style.staff_height
        self.staff_bottom = self.staff_top + style.staff_height
        self.band_bottom = band_top + style.band_height
        self.clef = clef
        ref_pitch, ref_octave = _CLEF_BOTTOM_LINE[clef]
        self.ref_step = diatonic_step(ref_pitch, ref_octave)
        self.glyphs: list[Glyph] = []

    def y_for(self, pitch_class: str, octave: int) -> float:
        step = diatonic_step(pitch_class, octave)
        y = self.staff_bottom - (step - self.ref_step) * (self.style.gap / 2)
        ry = self.head_ry
        return _clamp(y, self.band_top + ry, self.band_bottom - ry)

    @property
    def head_rx(self) -> float:
        return self.style.gap * 0.62

    @property
    def head_ry(self) -> float:
        return self.style.gap * 0.48

    def add_staff_lines(self):
        for k in range(5):
            y = self.staff_top + k * self.style.gap
            self.glyphs.append(Glyph("staff-line", Line(0.0, y, self.style.width, y)))

    def add_prefix(self, meter_arg: str | None):
        size = self.style.staff_height * 0.9
        mid = (self.staff_top + self.staff_bottom) / 2
        self.glyphs.append(
            Glyph("text", TextLabel(self.style.prefix_width * 0.1, self.staff_bottom, _CLEF_SYMBOL[self.clef], size))
        )
        if meter_arg:
            num, _, den = meter_arg.partition("/")
            tx = self.style.prefix_width * 0.6
            tsize = self.style.gap * 2.2
            self.glyphs.append(Glyph("text", TextLabel(tx, mid, num, tsize)))
            self.glyphs.append(Glyph("text", TextLabel(tx, self.staff_bottom, den or "", tsize)))

    def add_note_head(self, x: float, pitch_class: str, accidental: int, octave: int, duration: Fraction) -> float:
        rx, ry = self.head_rx, self.head_ry
        x = _clamp(x, rx, self.style.width - rx)
        y = self.y_for(pitch_class, octave)
        filled = duration < Fraction(1, 2)
        self.glyphs.append(Glyph("notehead", Ellipse(x, y, rx, ry, filled=filled)))
        if accidental:
            mark = "#" * accidental if accidental > 0 else "&" * -accidental
            ax = _clamp(x - 2.6 * rx, 0.0, self.style.width)
            self.glyphs.append(Glyph("text", TextLabel(ax, y + ry, mark, self.style.gap * 1.6)))
        return y

    def add_stem(self, x: float, head_ys: list[float], duration: Fraction):
        if duration >= 1:
            return  # whole notes carry no stem
        rx = self.head_rx
        top, bottom = min(head_ys), max(head_ys)
        mid = (self.staff_top + self.staff_bottom) / 2
        length = 3.5 * self.style.gap
        if (top + bottom) / 2 >= mid:  # stem up from the right side
            x1 = _clamp(x + rx, 0.0, self.style.width)
            y2 = _clamp(top - length, self.band_top, self.band_bottom)
            self.glyphs.append(Glyph("stem", Line(x1, top, x1, y2)))
        else:
            x1 = _clamp(x - rx, 0.0, self.style.width)
            y2 = _clamp(bottom + length, self.band_top, self.band_bottom)
            self.glyphs.append(Glyph("stem", Line(x1, bottom, x1, y2)))

    def add_rest(self, x: float):
        g = self.style.gap
        x = _clamp(x, g, self.style.width - g)
        mid = self.staff_top + 1.5 * g
        self.glyphs.append(
            Glyph(
                "rest",
                PolyPath(
                    (
                        (x - 0.7 * g, mid),
                        (x + 0.7 * g, mid),
                        (x + 0.7 * g, mid + 0.5 * g),
                        (x - 0.7 * g, mid + 0.5 * g),
                    ),
                    closed=True,
                    filled=True,
                ),
            )
        )

    def add_barline(self, x: float):
        x = _clamp(x, 0.0, self.style.width)
        self.glyphs.append(Glyph("barline", Line(x, self.staff_top, x, self.staff_bottom)))

    def add_annotation(self, x: float, text: str, above: bool, italic: bool):
        size = self.style.gap * 1.8
        x = _clamp(x, 0.0, self.style.width * 0.98)
        y = self.band_top + size if above else self.band_bottom - 0.3 * size
        self.glyphs.append(Glyph("text", TextLabel(x, y, text, size, italic=italic)))

    def add_range_arc(self, x1: float, x2: float):
        y = max(self.staff_top - 0.8 * self.style.gap, self.band_top)
        mid = (x1 + x2) / 2
        self.glyphs.append(
            Glyph(
                "stem",
                PolyPath(((x1, y + 0.4 * self.style.gap), (mid, y), (x2, y + 0.4 * self.style.gap))),
            )
        )


def layout_fragment(ast: ScoreAST, style: StaffStyle = StaffStyle()) -> tuple[GlyphSet, TimeMap]:
    """Lay out a parsed score; returns glyphs and the shared date->x map."""
    n_voices = max(len(ast.voices), 1)
    height = n_voices * style.band_height
    total = max((total_duration(v) for v in ast.voices), default=Fraction(0))

    def x_of(date: Fraction) -> float:
        if total == 0:
            return style.prefix_width
        return style.prefix_width + float(date / total) * (style.width - style.prefix_width)

    glyphs: list[Glyph] = []
    all_dates: set[Fraction] = set()
    for index, voice in enumerate(ast.voices):
        vl = _VoiceLayout(style, index * style.band_height, _voice_clef(voice))
        vl.add_staff_lines()
        vl.add_prefix(next((t.argument for _, t in voice.tags if t.name == "meter"), None))
        dates = voice.dates()
        all_dates.update(dates)
        xs = [x_of(d) for d in dates]
        for ev, x in zip(voice.events, xs):
            if ev.kind == "rest":
                vl.add_rest(x)
            elif ev.kind == "note":
                y = vl.add_note_head(x, ev.pitch_class, ev.accidental, ev.octave, ev.duration)
                vl.add_stem(x, [y], ev.duration)
            else:
                ys = [vl.add_note_head(x, p, a, o, ev.duration) for p, a, o in ev.chord_members]
                vl.add_stem(x, ys, ev.duration)
        for pos, tag in voice.tags:
            if pos < len(xs):
                x = xs[pos]
            elif xs:
                x = xs[-1]
            else:
                x = style.prefix_width
            if tag.name == "intens" and tag.argument:
                vl.add_annotation(x, tag.argument, above=False, italic=True)
            elif tag.name == "text" and tag.argument:
                label = tag.argument
                if label.startswith("\\"):  # verbatim unsupported tag: show its name
                    label = label.lstrip("\\").split("<")[0]
                vl.add_annotation(x, label, above=True, italic=True)
            elif tag.name == "pizz":
                vl.add_annotation(x, "pizz.", above=True, italic=True)
            elif tag.name in ("slur", "tie") and tag.range_len > 0:
                end_index = min(pos + tag.range_len - 1, len(xs) - 1)
                if 0 <= pos < len(xs):
                    vl.add_range_arc(xs[pos], xs[end_index])
        measure = _meter_duration(voice)
        if measure and total > 0:
            boundary = measure
            while boundary < total:
                vl.add_barline(x_of(boundary))
                boundary += measure
        vl.add_barline(style.width)
        glyphs.extend(vl.glyphs)

    if not ast.voices:
        vl = _VoiceLayout(style, 0.0, "treble")
        vl.add_staff_lines()
        glyphs.extend(vl.glyphs)

    breakpoints: list[tuple[Fraction, float]] = [(Fraction(0), x_of(Fraction(0)))]
    for date in sorted(all_dates):
        if date > 0:
            breakpoints.append((date, x_of(date)))
    if total > 0 and (not breakpoints or breakpoints[-1][0] != total):
        breakpoints.append((total, style.width))
    return GlyphSet(tuple(glyphs), style.width, height), TimeMap(tuple(breakpoints))


def x_at_date(timemap: TimeMap, date: Fraction | int | float) -> float:
    """Piecewise-linear interpolation, clamped to the map's ends."""
    bps = timemap.breakpoints
    if not bps:
        return 0.0
    if not isinstance(date, Fraction):
        date = Fraction(date)
    dates = [d for d, _ in bps]
    if date <= dates[0]:
        return bps[0][1]
    if date >= dates[-1]:
        return bps[-1][1]
    hi = bisect.bisect_right(dates, date)
    (d0, x0), (d1, x1) = bps[hi - 1], bps[hi]
    t = float((date - d0) / (d1 - d0))
    return x0 + t * (x1 - x0)


def _shape_extent(shape: Shape) -> tuple[float, float, float, float]:
    if isinstance(shape, Line):
        return (min(shape.x1, shape.x2), min(shape.y1, shape.y2),
                max(shape.x1, shape.x2), max(shape.y1, shape.y2))
    if isinstance(shape, Ellipse):
        return (shape.cx - shape.rx, shape.cy - shape.ry, shape.cx + shape.rx, shape.cy + shape.ry)
    if isinstance(shape, PolyPath):
        xs = [p[0] for p in shape.points]
        ys = [p[1] for p in shape.points]
        return (min(xs), min(ys), max(xs), max(ys))
    # text extents are an approximation from anchor, size and glyph count
    w = 0.55 * shape.size * max(len(shape.text), 1)
    return (shape.x, shape.y - 0.8 * shape.size, shape.x + w, shape.y + 0.25 * shape.size)


def apply_matrix(m: Matrix, x: float, y: float) -> tuple[float, float]:
    a, b, c, d, e, f = m
    return (a * x + c * y + e, b * x + d * y + f)


def bounding_box(glyph_set: GlyphSet, transform: Matrix) -> tuple[float, float, float, float]:
    """Axis-aligned box (x0, y0, x1, y1) enclosing all transformed glyphs."""
    min_x = min_y = float("inf")
    max_x = max_y = float("-inf")
    for glyph in glyph_set.glyphs:
        x0, y0, x1, y1 = _shape_extent(glyph.shape)
        for px, py in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
            tx, ty = apply_matrix(transform, px, py)
            min_x, min_y = min(min_x, tx), min(min_y, ty)
            max_x, max_y = max(max_x, tx), max(max_y, ty)
    if min_x > max_x:  # no glyphs
        for px, py in ((0.0, 0.0), (glyph_set.width, glyph_set.height)):
            tx, ty = apply_matrix(transform, px, py)
            min_x, min_y = min(min_x, tx), min(min_y, ty)
            max_x, max_y = max(max_x, tx), max(max_y, ty)
    return (min_x, min_y, max_x, max_y)


def boxes_intersect(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _shape_dict(shape: Shape) -> dict:
    if isinstance(shape, Line):
        return {"type": "line", "x1": shape.x1, "y1": shape.y1, "x2": shape.x2, "y2": shape.y2}
    if isinstance(shape, Ellipse):
        return {
            "type": "ellipse", "cx": shape.cx, "cy": shape.cy,
            "rx": shape.rx, "ry": shape.ry, "filled": shape.filled,
        }
    if isinstance(shape, PolyPath):
        return {
            "type": "path", "points": [list(p) for p in shape.points],
            "closed": shape.closed, "filled": shape.filled,
        }
    return {
        "type": "text", "x": shape.x, "y": shape.y, "text": shape.text,
        "size": shape.size, "italic": shape.italic,
    }


def geometry_dict(glyph_set: GlyphSet, timemap: TimeMap) -> dict:
    """JSON-friendly geometry payload used by the state feed and its hash."""
    return {
        "width": glyph_set.width,
        "height": glyph_set.height,
        "glyphs": [{"kind": g.kind, **_shape_dict(g.shape)} for g in glyph_set.glyphs],
        "timemap": [[d.numerator, d.denominator, x] for d, x in timemap.breakpoints],
    }
