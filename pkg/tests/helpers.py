"""Shared test helpers: deterministic random-notation corpus generation."""

import random
from fractions import Fraction

from notemotion.gmn import ScoreAST, Tag, Voice, Event

PITCHES = "cdefgab"
DURATIONS = [
    Fraction(1, 1), Fraction(1, 2), Fraction(1, 4), Fraction(1, 8),
    Fraction(1, 16), Fraction(3, 8), Fraction(3, 16), Fraction(7, 32),
    Fraction(2, 1), Fraction(5, 4),
]
TAG_POOL = [
    ("clef", "treble"), ("clef", "alto"), ("clef", "bass"),
    ("meter", "4/4"), ("meter", "8/8"), ("meter", "3/4"),
    ("intens", "pp"), ("intens", "mp"), ("intens", "ff"),
    ("text", "vibrato ad lib."), ("text", "sul pont."), ("pizz", None),
]


def random_event(rng: random.Random) -> Event:
    kind = rng.choices(["note", "rest", "chord"], weights=[7, 2, 1])[0]
    dur = rng.choice(DURATIONS)
    if kind == "rest":
        return Event(kind="rest", duration=dur)
    if kind == "note":
        return Event(
            kind="note",
            duration=dur,
            pitch_class=rng.choice(PITCHES),
            accidental=rng.randint(-2, 2),
            octave=rng.randint(-1, 3),
        )
    members = tuple(
        (rng.choice(PITCHES), rng.randint(-1, 1), rng.randint(0, 2))
        for _ in range(rng.randint(2, 4))
    )
    return Event(kind="chord", duration=dur, chord_members=members)


def random_voice(rng: random.Random, max_events: int = 12) -> Voice:
    voice = Voice()
    n = rng.randint(0, max_events)
    for _ in range(n):
        voice.events.append(random_event(rng))
    covered: set[int] = set()
    for _ in range(rng.randint(0, 3)):
        pos = rng.randint(0, n)
        name, arg = rng.choice(TAG_POOL)
        max_range = n - pos
        range_len = 0
        # ranges must nest to be expressible with parentheses; keep them disjoint
        if max_range > 0 and rng.random() < 0.3:
            span = rng.randint(1, max_range)
            if not covered.intersection(range(pos, pos + span)):
                range_len = span
                covered.update(range(pos, pos + span))
        voice.tags.append((pos, Tag(name=name, argument=arg, range_len=range_len)))
    voice.tags.sort(key=lambda pt: pt[0])
    return voice


def random_score(seed: int) -> ScoreAST:
    rng = random.Random(seed)
    return ScoreAST(voices=[random_voice(rng) for _ in range(rng.randint(1, 4))])
