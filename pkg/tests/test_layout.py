import math
from fractions import Fraction

from helpers import random_score
from notemotion.gmn import ScoreAST, parse
from notemotion.layout import (
    Ellipse,
    Line,
    PolyPath,
    StaffStyle,
    TextLabel,
    bounding_box,
    boxes_intersect,
    layout_fragment,
    x_at_date,
)

IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
STYLE = StaffStyle(width=1.0, prefix_width=0.1)


def test_proportional_event_positions():
    glyphs, timemap = layout_fragment(parse("[ c d e f ]"), STYLE)
    heads = [g.shape for g in glyphs.glyphs if g.kind == "notehead"]
    xs = [h.cx for h in heads]
    assert xs == [0.1, 0.325, 0.55, 0.775]


def test_empty_voice_staff_only():
    glyphs, timemap = layout_fragment(parse("[ ]"), STYLE)
    kinds = {g.kind for g in glyphs.glyphs}
    assert "staff-line" in kinds
    assert "notehead" not in kinds
    assert timemap.breakpoints == ((Fraction(0), 0.1),)


def test_four_voice_score_stacks_staves():
    ast = parse("{ [c], [d], [e], [f] }")
    glyphs, timemap = layout_fragment(ast, STYLE)
    staff_lines = [g.shape for g in glyphs.glyphs if g.kind == "staff-line"]
    assert len(staff_lines) == 20
    assert math.isclose(glyphs.height, 4 * STYLE.band_height)
    # shared x map: all four single notes at the same date
    heads = [g.shape for g in glyphs.glyphs if g.kind == "notehead"]
    assert len({h.cx for h in heads}) == 1


def test_x_at_date_endpoints_and_midpoint():
    _, timemap = layout_fragment(parse("[ c d e f ]"), STYLE)
    assert x_at_date(timemap, Fraction(0)) == 0.1
    mid = x_at_date(timemap, Fraction(1, 8))
    assert math.isclose(mid, (0.1 + 0.325) / 2)
    assert x_at_date(timemap, Fraction(99)) == 1.0  # clamped to the end


def test_x_at_date_monotone_fuzz():
    for seed in range(15):
        ast = random_score(seed)
        _, timemap = layout_fragment(ast, STYLE)
        if not timemap.breakpoints:
            continue
        last_date = timemap.breakpoints[-1][0]
        samples = [last_date * Fraction(k, 40) for k in range(41)]
        xs = [x_at_date(timemap, d) for d in samples]
        assert all(a <= b + 1e-12 for a, b in zip(xs, xs[1:]))


def test_doubling_durations_preserves_positions():
    ast1 = parse("[ c/8 d/4 e/8 ]")
    ast2 = parse("[ c/4 d/2 e/4 ]")
    xs1 = [g.shape.cx for g in layout_fragment(ast1, STYLE)[0].glyphs if g.kind == "notehead"]
    xs2 = [g.shape.cx for g in layout_fragment(ast2, STYLE)[0].glyphs if g.kind == "notehead"]
    assert xs1 == xs2


def _coords(shape):
    if isinstance(shape, Line):
        return [(shape.x1, shape.y1), (shape.x2, shape.y2)]
    if isinstance(shape, Ellipse):
        return [(shape.cx, shape.cy)]
    if isinstance(shape, PolyPath):
        return list(shape.points)
    if isinstance(shape, TextLabel):
        return [(shape.x, shape.y)]
    raise TypeError(shape)


def test_glyph_containment_fuzz():
    for seed in range(25):
        ast = random_score(seed + 77)
        glyphs, _ = layout_fragment(ast, STYLE)
        for g in glyphs.glyphs:
            for x, y in _coords(g.shape):
                assert -1e-9 <= x <= glyphs.width + 1e-9, g
                assert -1e-9 <= y <= glyphs.height + 1e-9, g


def test_staff_lines_span_full_width():
    glyphs, _ = layout_fragment(parse("[ c ]"), STYLE)
    for g in glyphs.glyphs:
        if g.kind == "staff-line":
            assert g.shape.x1 == 0.0 and g.shape.x2 == glyphs.width


def test_clef_changes_head_position():
    treble, _ = layout_fragment(parse('[ \\clef<"treble"> c ]'), STYLE)
    alto, _ = layout_fragment(parse('[ \\clef<"alto"> c ]'), STYLE)
    yt = [g.shape.cy for g in treble.glyphs if g.kind == "notehead"][0]
    ya = [g.shape.cy for g in alto.glyphs if g.kind == "notehead"][0]
    assert yt != ya


def test_meter_produces_internal_barlines():
    ast = parse('[ \\meter<"1/4"> c d e f ]')
    glyphs, _ = layout_fragment(ast, STYLE)
    bars = [g for g in glyphs.glyphs if g.kind == "barline"]
    # three internal boundaries (1/4, 2/4, 3/4) plus the final barline
    assert len(bars) == 4


def test_bounding_box_identity():
    glyphs, _ = layout_fragment(parse("[ c d ]"), STYLE)
    x0, y0, x1, y1 = bounding_box(glyphs, IDENTITY)
    assert x0 >= 0 and y0 >= 0
    assert x1 <= glyphs.width + 1e-9 and y1 <= glyphs.height + 1e-9
    assert x1 > x0 and y1 > y0


def test_bounding_box_translation():
    glyphs, _ = layout_fragment(parse("[ c d ]"), STYLE)
    base = bounding_box(glyphs, IDENTITY)
    shifted = bounding_box(glyphs, (1.0, 0.0, 0.0, 1.0, 0.5, 0.0))
    assert math.isclose(shifted[0], base[0] + 0.5)
    assert math.isclose(shifted[2], base[2] + 0.5)
    assert math.isclose(shifted[1], base[1])


def test_bounding_box_rotation_90():
    glyphs, _ = layout_fragment(parse("[ c d ]"), STYLE)
    w, h = glyphs.width, glyphs.height
    cx, cy = w / 2, h / 2
    # rotate 90 degrees about the fragment center: (x,y) -> (cx - (y-cy), cy + (x-cx))
    m = (0.0, 1.0, -1.0, 0.0, cx + cy, cy - cx)
    base = bounding_box(glyphs, IDENTITY)
    rot = bounding_box(glyphs, m)
    # oracle: transform the base box corners by hand
    expect_x = sorted([cx - (base[1] - cy), cx - (base[3] - cy)])
    expect_y = sorted([cy + (base[0] - cx), cy + (base[2] - cx)])
    assert math.isclose(rot[0], expect_x[0]) and math.isclose(rot[2], expect_x[1])
    assert math.isclose(rot[1], expect_y[0]) and math.isclose(rot[3], expect_y[1])
    # width/height swap about the center
    assert math.isclose(rot[2] - rot[0], base[3] - base[1])
    assert math.isclose(rot[3] - rot[1], base[2] - base[0])


def test_boxes_intersect():
    assert boxes_intersect((0, 0, 2, 2), (1, 1, 3, 3))
    assert not boxes_intersect((0, 0, 1, 1), (2, 2, 3, 3))
    assert not boxes_intersect((0, 0, 1, 1), (1, 0, 2, 1))  # touching edges


def test_empty_score_minimal():
    glyphs, timemap = layout_fragment(ScoreAST(voices=[]), STYLE)
    assert any(g.kind == "staff-line" for g in glyphs.glyphs)
    assert timemap.breakpoints == ((Fraction(0), 0.1),)
