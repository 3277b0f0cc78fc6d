"""GUIDO Music Notation subset parser.

Supported subset: single voices `[ ... ]`, parallel voices `{ [..], [..] }`,
notes with accidentals/octave/duration, rests `_`, chords `{c,e,g}` inside a
voice, and tags `\\name<"arg">` (positional or ranged with parentheses).
Durations are exact rationals in whole-note units. Unknown tags are kept
verbatim as text-class annotations rather than dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

PITCH_CLASSES = "cdefgab"

# semitone offset of each pitch class within an octave
_CHROMA = {"c": 0, "d": 2, "e": 4, "f": 5, "g": 7, "a": 9, "b": 11}

# diatonic step within an octave, used by layout for staff placement
_DIATONIC = {"c": 0, "d": 1, "e": 2, "f": 3, "g": 4, "a": 5, "b": 6}

SUPPORTED_TAGS = frozenset({"clef", "meter", "intens", "text", "pizz", "slur", "tie"})

DEFAULT_DURATION = Fraction(1, 4)
DEFAULT_OCTAVE = 1


class GmnError(Exception):
    """Base class for notation parse failures, carrying source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class GmnSyntaxError(GmnError):
    """Unexpected input; `expected` lists the token kinds that would parse."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message} (expected {' | '.join(expected)})"
        super().__init__(message, line, col)


class UnbalancedDelimiter(GmnError):
    pass


class BadDuration(GmnError):
    pass


class EmptyScore(GmnError):
    pass


@dataclass(frozen=True)
class Tag:
    """Notation instruction attached to a voice position.

    `range_len` counts the events enclosed by a parenthesized range form
    (e.g. a slur); 0 means the tag is purely positional.
    """

    name: str
    argument: Optional[str] = None
    range_len: int = 0


@dataclass(frozen=True)
class Event:
    kind: str  # note | rest | chord
    duration: Fraction
    pitch_class: Optional[str] = None
    accidental: int = 0
    octave: int = 0
    chord_members: tuple[tuple[str, int, int], ...] = ()

    def __post_init__(self):
        if self.duration <= 0:
            raise BadDuration(f"non-positive duration {self.duration}")
        if self.kind == "chord" and len(self.chord_members) < 2:
            raise BadDuration("chord needs at least 2 members")


@dataclass
class Voice:
    events: list[Event] = field(default_factory=list)
    tags: list[tuple[int, Tag]] = field(default_factory=list)

    def dates(self) -> list[Fraction]:
        """Onset of each event: prefix sums of durations, starting at 0."""
        out, acc = [], Fraction(0)
        for ev in self.events:
            out.append(acc)
            acc += ev.duration
        return out

    def tags_at(self, position: int) -> list[Tag]:
        return [t for p, t in self.tags if p == position]


@dataclass
class ScoreAST:
    voices: list[Voice]
    source_text: str = field(default="", compare=False)


def midi_number(pitch_class: str, accidental: int, octave: int) -> int:
    """MIDI note number under the register convention c1 = 60 (a1 = 69)."""
    if pitch_class not in _CHROMA:
        raise ValueError(f"unknown pitch class {pitch_class!r}")
    return 12 * (octave + 4) + _CHROMA[pitch_class] + accidental


def diatonic_step(pitch_class: str, octave: int) -> int:
    """Staff-step index (7 per octave), used for notehead placement."""
    return 7 * octave + _DIATONIC[pitch_class]


def total_duration(voice: Voice) -> Fraction:
    return sum((ev.duration for ev in voice.events), Fraction(0))


class _Scanner:
    """Character cursor with line/column tracking and `%` line comments."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return ch

    def skip_ws(self):
        while not self.eof():
            ch = self.peek()
            if ch in " \t\r\n":
                self.advance()
            elif ch == "%":  # comment to end of line
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                return

    def error(self, message: str, expected: tuple[str, ...] = ()) -> GmnSyntaxError:
        return GmnSyntaxError(message, self.line, self.col, expected)


class _Parser:
    def __init__(self, text: str):
        self.s = _Scanner(text)

    def parse_score(self) -> ScoreAST:
        s = self.s
        s.skip_ws()
        if s.eof():
            raise EmptyScore("no voices in input", s.line, s.col)
        voices: list[Voice] = []
        if s.peek() == "{":
            open_line, open_col = s.line, s.col
            s.advance()
            while True:
                s.skip_ws()
                if s.eof():
                    raise UnbalancedDelimiter("unclosed '{'", open_line, open_col)
                voices.append(self.parse_voice())
                s.skip_ws()
                if s.peek() == ",":
                    s.advance()
                    continue
                if s.peek() == "}":
                    s.advance()
                    break
                if s.eof():
                    raise UnbalancedDelimiter("unclosed '{'", open_line, open_col)
                raise s.error("unexpected input in voice list", (",", "}"))
        elif s.peek() == "[":
            voices.append(self.parse_voice())
        else:
            raise s.error(f"unexpected character {s.peek()!r}", ("[", "{"))
        s.skip_ws()
        if not s.eof():
            raise s.error("trailing input after score", ("end of input",))
        return ScoreAST(voices=voices, source_text=self.s.text)

    def parse_voice(self) -> Voice:
        s = self.s
        if s.peek() != "[":
            raise s.error(f"unexpected character {s.peek()!r}", ("[",))
        open_line, open_col = s.line, s.col
        s.advance()
        voice = Voice()
        state = _VoiceState()
        while True:
            s.skip_ws()
            if s.eof():
                raise UnbalancedDelimiter("unclosed '['", open_line, open_col)
            if s.peek() == "]":
                s.advance()
                return voice
            self.parse_item(voice, state)

    def parse_item(self, voice: Voice, state: "_VoiceState"):
        """One voice item: a tag, a note, a rest, or a chord."""
        s = self.s
        ch = s.peek()
        if ch == "\\":
            self.parse_tag(voice, state)
        elif ch == "_":
            s.advance()
            dur = self.parse_duration(state.duration)
            state.duration = dur
            voice.events.append(Event(kind="rest", duration=dur))
        elif ch == "{":
            self.parse_chord(voice, state)
        elif ch in PITCH_CLASSES:
            pitch, acc, octave = self.parse_pitch(state)
            dur = self.parse_duration(state.duration)
            state.duration = dur
            state.octave = octave
            voice.events.append(
                Event(kind="note", duration=dur, pitch_class=pitch, accidental=acc, octave=octave)
            )
        else:
            raise s.error(
                f"unexpected character {ch!r}", ("note", "rest '_'", "chord '{'", "tag '\\'", "]")
            )

    def parse_pitch(self, state: "_VoiceState") -> tuple[str, int, int]:
        s = self.s
        pitch = s.advance()
        acc = 0
        while s.peek() in ("#", "&"):  # tuple: "" at EOF must not match
            mark = s.advance()
            acc += 1 if mark == "#" else -1
            if abs(acc) > 2:
                raise s.error("more than a double accidental")
        octave = state.octave
        if s.peek() == "-" or s.peek().isdigit():
            octave = self.parse_int("octave")
        return pitch, acc, octave

    def parse_int(self, what: str) -> int:
        s = self.s
        start = s.pos
        sign = 1
        if s.peek() == "-":
            s.advance()
            sign = -1
        if not s.peek().isdigit():
            raise s.error(f"malformed {what}", ("integer",))
        value = 0
        while s.peek().isdigit():
            value = value * 10 + int(s.advance())
        if s.pos == start:
            raise s.error(f"malformed {what}", ("integer",))
        return sign * value

    def parse_duration(self, inherited: Fraction) -> Fraction:
        """`*num`, `/den`, `*num/den`, optionally dotted; else inherit."""
        s = self.s
        num, den = None, None
        line, col = s.line, s.col
        if s.peek() == "*":
            s.advance()
            num = self.parse_int("duration numerator")
        if s.peek() == "/":
            s.advance()
            den = self.parse_int("duration denominator")
        if num is None and den is None:
            return inherited
        if num is None:
            num = 1
        if den is None:
            den = 1
        if num <= 0 or den <= 0:
            raise BadDuration(f"bad duration {num}/{den}", line, col)
        dur = Fraction(num, den)
        extra = dur / 2
        dots = 0
        while s.peek() == "." and dots < 2:
            s.advance()
            dur += extra
            extra /= 2
            dots += 1
        return dur

    def parse_chord(self, voice: Voice, state: "_VoiceState"):
        s = self.s
        open_line, open_col = s.line, s.col
        s.advance()  # '{'
        members: list[tuple[str, int, int]] = []
        chord_dur: Optional[Fraction] = None
        while True:
            s.skip_ws()
            if s.eof():
                raise UnbalancedDelimiter("unclosed chord '{'", open_line, open_col)
            if s.peek() not in PITCH_CLASSES:
                raise s.error(f"unexpected character {s.peek()!r} in chord", ("note",))
            pitch, acc, octave = self.parse_pitch(state)
            state.octave = octave
            dur = self.parse_duration(state.duration)
            if dur != state.duration and chord_dur is None:
                chord_dur = dur
            members.append((pitch, acc, octave))
            s.skip_ws()
            if s.peek() == ",":
                s.advance()
                continue
            if s.peek() == "}":
                s.advance()
                break
            raise s.error("unexpected input in chord", (",", "}"))
        if len(members) < 2:
            raise GmnSyntaxError("chord needs at least 2 members", open_line, open_col)
        dur = chord_dur if chord_dur is not None else state.duration
        state.duration = dur
        voice.events.append(Event(kind="chord", duration=dur, chord_members=tuple(members)))

    def parse_tag(self, voice: Voice, state: "_VoiceState"):
        s = self.s
        tag_line, tag_col = s.line, s.col
        s.advance()  # '\'
        name_chars = []
        while s.peek().isalpha():
            name_chars.append(s.advance())
        if not name_chars:
            raise s.error("missing tag name after '\\'", ("tag name",))
        name = "".join(name_chars)
        argument = None
        if s.peek() == "<":
            argument = self.parse_tag_argument()
        if name not in SUPPORTED_TAGS:
            # preserved verbatim as a text-class annotation
            verbatim = "\\" + name
            if argument is not None:
                verbatim += f'<"{argument}">'
            name, argument = "text", verbatim
        position = len(voice.events)
        # reserve the slot now so outer range tags precede their inner tags
        slot = len(voice.tags)
        voice.tags.append((position, Tag(name=name, argument=argument)))
        s.skip_ws()
        if s.peek() == "(":
            open_line, open_col = s.line, s.col
            s.advance()
            before = len(voice.events)
            while True:
                s.skip_ws()
                if s.eof():
                    raise UnbalancedDelimiter("unclosed tag range '('", open_line, open_col)
                if s.peek() == ")":
                    s.advance()
                    break
                if s.peek() == "]":
                    raise UnbalancedDelimiter("unclosed tag range '('", open_line, open_col)
                self.parse_item(voice, state)
            range_len = len(voice.events) - before
            voice.tags[slot] = (position, Tag(name=name, argument=argument, range_len=range_len))

    def parse_tag_argument(self) -> str:
        s = self.s
        open_line, open_col = s.line, s.col
        s.advance()  # '<'
        s.skip_ws()
        if s.peek() == '"':
            s.advance()
            chars = []
            while True:
                if s.eof():
                    raise UnbalancedDelimiter("unclosed tag string", open_line, open_col)
                ch = s.advance()
                if ch == "\\" and s.peek() in ('"', "\\"):
                    chars.append(s.advance())
                elif ch == '"':
                    break
                else:
                    chars.append(ch)
            arg = "".join(chars)
            s.skip_ws()
        else:
            chars = []
            while not s.eof() and s.peek() != ">":
                chars.append(s.advance())
            arg = "".join(chars).strip()
        if s.eof() or s.peek() != ">":
            raise UnbalancedDelimiter("unclosed tag argument '<'", open_line, open_col)
        s.advance()
        return arg


class _VoiceState:
    """Running defaults: duration and octave stick from the previous event."""

    def __init__(self):
        self.duration = DEFAULT_DURATION
        self.octave = DEFAULT_OCTAVE


def parse(text: str) -> ScoreAST:
    """Parse GMN source into a ScoreAST; raises GmnError subclasses."""
    return _Parser(text).parse_score()


def _format_duration(dur: Fraction) -> str:
    if dur.numerator == 1:
        return f"/{dur.denominator}"
    if dur.denominator == 1:
        return f"*{dur.numerator}"
    return f"*{dur.numerator}/{dur.denominator}"


def _format_pitch(pitch: str, acc: int, octave: int, running_octave: int) -> str:
    out = pitch + ("#" * acc if acc > 0 else "&" * -acc)
    if octave != running_octave:
        out += str(octave)
    return out


def _escape_tag_arg(arg: str) -> str:
    return arg.replace("\\", "\\\\").replace('"', '\\"')


def to_gmn(ast: ScoreAST) -> str:
    """Pretty-print an AST back to notation text; re-parsing it yields an
    AST structurally equal to the input (round-trip law)."""
    voice_texts = [_print_voice(v) for v in ast.voices]
    if len(voice_texts) == 1:
        return voice_texts[0]
    return "{ " + ", ".join(voice_texts) + " }"


def _print_tag(tag: Tag) -> str:
    if tag.name == "text" and tag.argument and tag.argument.startswith("\\"):
        return tag.argument  # verbatim unsupported tag
    out = "\\" + tag.name
    if tag.argument is not None:
        out += f'<"{_escape_tag_arg(tag.argument)}">'
    return out


def _print_voice(voice: Voice) -> str:
    # ranged tags open at their position and close range_len events later
    opens: dict[int, list[Tag]] = {}
    for pos, tag in voice.tags:
        opens.setdefault(pos, []).append(tag)
    parts: list[str] = []
    state = _VoiceState()
    closers: list[int] = []  # event indices at which a ')' is due (innermost last)
    for idx in range(len(voice.events) + 1):
        while closers and closers[-1] == idx:
            parts.append(")")
            closers.pop()
        for tag in opens.get(idx, ()):
            parts.append(_print_tag(tag))
            if tag.range_len > 0:
                parts.append("(")
                closers.append(idx + tag.range_len)
        if idx == len(voice.events):
            break
        parts.append(_print_event(voice.events[idx], state))
    return "[ " + " ".join(parts) + " ]"


def _print_event(ev: Event, state: _VoiceState) -> str:
    dur = "" if ev.duration == state.duration else _format_duration(ev.duration)
    if ev.kind == "rest":
        out = "_" + dur
    elif ev.kind == "note":
        out = _format_pitch(ev.pitch_class, ev.accidental, ev.octave, state.octave) + dur
        state.octave = ev.octave
    else:
        member_texts = []
        for i, (pitch, acc, octave) in enumerate(ev.chord_members):
            text = _format_pitch(pitch, acc, octave, state.octave)
            if i == 0:
                text += dur
            member_texts.append(text)
            state.octave = octave
        out = "{" + ",".join(member_texts) + "}"
    state.duration = ev.duration
    return out


def ast_to_dict(ast: ScoreAST) -> dict:
    """JSON-friendly dump used by the CLI machine format and the state feed."""
    return {
        "voices": [
            {
                "events": [
                    {
                        "kind": ev.kind,
                        "duration": [ev.duration.numerator, ev.duration.denominator],
                        "date": [date.numerator, date.denominator],
                        **(
                            {
                                "pitch": ev.pitch_class,
                                "accidental": ev.accidental,
                                "octave": ev.octave,
                            }
                            if ev.kind == "note"
                            else {}
                        ),
                        **(
                            {"members": [list(m) for m in ev.chord_members]}
                            if ev.kind == "chord"
                            else {}
                        ),
                    }
                    for ev, date in zip(v.events, v.dates())
                ],
                "tags": [
                    {
                        "position": pos,
                        "name": tag.name,
                        "argument": tag.argument,
                        "range_len": tag.range_len,
                    }
                    for pos, tag in v.tags
                ],
            }
            for v in ast.voices
        ]
    }
