from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_score
from notemotion.gmn import (
    BadDuration,
    EmptyScore,
    GmnError,
    GmnSyntaxError,
    Tag,
    UnbalancedDelimiter,
    midi_number,
    parse,
    to_gmn,
    total_duration,
)


def test_single_default_note():
    ast = parse("[ c ]")
    assert len(ast.voices) == 1
    (ev,) = ast.voices[0].events
    assert ev.kind == "note"
    assert ev.pitch_class == "c"
    assert ev.octave == 1
    assert ev.duration == Fraction(1, 4)


def test_parallel_voices_identical_dates():
    ast = parse("{[c],[e]}")
    assert len(ast.voices) == 2
    assert all(len(v.events) == 1 for v in ast.voices)
    assert ast.voices[0].dates() == ast.voices[1].dates()


def test_meter_and_dynamics_tags_at_position_zero():
    ast = parse('[ \\meter<"8/8"> \\intens<"mp"> c d ]')
    voice = ast.voices[0]
    assert voice.tags_at(0) == [Tag("meter", "8/8"), Tag("intens", "mp")]
    assert len(voice.events) == 2


def test_dotted_duration():
    ast = parse("[ c/8. ]")
    assert ast.voices[0].events[0].duration == Fraction(3, 16)


def test_double_dotted_duration():
    ast = parse("[ c/8.. ]")
    assert ast.voices[0].events[0].duration == Fraction(7, 32)


def test_unbalanced_voice_errors():
    with pytest.raises(UnbalancedDelimiter):
        parse("[ c d")
    with pytest.raises(UnbalancedDelimiter):
        parse("{ [c], [d]")
    with pytest.raises(UnbalancedDelimiter):
        parse('[ \\text<"x ]')


def test_duration_inheritance():
    ast = parse("[ c/8 d e ]")
    assert [ev.duration for ev in ast.voices[0].events] == [Fraction(1, 8)] * 3


def test_octave_inheritance():
    ast = parse("[ c2 d e-1 f ]")
    assert [ev.octave for ev in ast.voices[0].events] == [2, 2, -1, -1]


def test_rest_and_accidentals():
    ast = parse("[ _/2 c# d& e## f&& ]")
    evs = ast.voices[0].events
    assert evs[0].kind == "rest" and evs[0].duration == Fraction(1, 2)
    assert [e.accidental for e in evs[1:]] == [1, -1, 2, -2]
    # rests participate in duration inheritance
    assert evs[1].duration == Fraction(1, 2)


def test_triple_accidental_rejected():
    with pytest.raises(GmnSyntaxError):
        parse("[ c### ]")


def test_chord():
    ast = parse("[ {c/2,e,g} ]")
    (ev,) = ast.voices[0].events
    assert ev.kind == "chord"
    assert ev.duration == Fraction(1, 2)
    assert ev.chord_members == (("c", 0, 1), ("e", 0, 1), ("g", 0, 1))


def test_chord_needs_two_members():
    with pytest.raises(GmnError):
        parse("[ {c} ]")


def test_unknown_tag_preserved_as_text():
    ast = parse('[ \\fermata<"long"> c ]')
    (pos, tag) = ast.voices[0].tags[0]
    assert pos == 0
    assert tag.name == "text"
    assert tag.argument == '\\fermata<"long">'


def test_range_tag():
    ast = parse("[ \\slur( c d e ) f ]")
    voice = ast.voices[0]
    assert len(voice.events) == 4
    (pos, tag) = voice.tags[0]
    assert (pos, tag.name, tag.range_len) == (0, "slur", 3)


def test_dangling_range_tag():
    with pytest.raises(UnbalancedDelimiter):
        parse("[ \\slur( c d ]")


def test_zero_duration_rejected():
    with pytest.raises(BadDuration):
        parse("[ c/0 ]")
    with pytest.raises(BadDuration):
        parse("[ c*0 ]")


def test_empty_input():
    with pytest.raises(EmptyScore):
        parse("")
    with pytest.raises(EmptyScore):
        parse("   % only a comment\n")


def test_midi_numbers():
    assert midi_number("c", 0, 1) == 60
    assert midi_number("a", 0, 1) == 69
    assert midi_number("c", 1, 1) == 61
    assert midi_number("b", 0, 0) == 59
    with pytest.raises(ValueError):
        midi_number("x", 0, 1)


def test_total_duration():
    assert total_duration(parse("[ c d e f ]").voices[0]) == Fraction(1)
    assert total_duration(parse("[ \\pizz c ]").voices[0]) == Fraction(1, 4)
    assert total_duration(parse("[ c/8. c/16 ]").voices[0]) == Fraction(1, 4)


def test_total_duration_empty_voice():
    assert total_duration(parse("[ ]").voices[0]) == Fraction(0)


def test_prefix_sum_dates():
    ast = parse("[ c/8 d/4 e/2 f ]")
    assert ast.voices[0].dates() == [
        Fraction(0),
        Fraction(1, 8),
        Fraction(3, 8),
        Fraction(7, 8),
    ]


@pytest.mark.parametrize("seed", range(40))
def test_roundtrip_random_scores(seed):
    ast = random_score(seed)
    printed = to_gmn(ast)
    reparsed = parse(printed)
    assert reparsed == ast, printed


def test_roundtrip_source_forms():
    sources = [
        "[ c d e f ]",
        "[ c#2/8. d&& _ {c*3/8,e1,g} ]",
        '{ [ \\clef<"alto"> \\meter<"8/8"> c ], [ \\slur( d e ) ] }',
        '[ \\text<"vibrato ad lib."> c2 d ]',
        "[ c/8 d e*5/16 f ]",
    ]
    for src in sources:
        first = parse(src)
        assert parse(to_gmn(first)) == first


@given(st.text(max_size=60))
@settings(max_examples=400, deadline=None)
def test_parse_never_panics(text):
    try:
        ast = parse(text)
    except GmnError:
        return
    assert ast.voices


@given(st.binary(max_size=60))
@settings(max_examples=300, deadline=None)
def test_parse_never_panics_on_bytes(data):
    try:
        parse(data.decode("latin-1"))
    except GmnError:
        pass


def test_prefix_sum_property_fuzz():
    for seed in range(30):
        ast = random_score(seed + 1000)
        for voice in ast.voices:
            dates = voice.dates()
            acc = Fraction(0)
            for ev, date in zip(voice.events, dates):
                assert date == acc
                acc += ev.duration
            assert total_duration(voice) == acc
