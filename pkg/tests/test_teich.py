import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idealhyp.fixtures import k4_graph
from idealhyp.packing import triangulation_from_faces
from idealhyp.teich import (
    PENTAGON_FLIPS,
    AngleChart,
    FlipError,
    det2,
    elementary_circuit_preservation,
    flip,
    flipped_surface,
    octahedron_surface,
    pentagon_holonomy,
    pentagon_surface,
    quad_of,
    square_holonomy,
)

fracs = st.fractions(min_value=-3, max_value=3, max_denominator=50)


def octa_chart(values=None):
    s = octahedron_surface()
    if values is None:
        values = [Fraction(k + 1, 9) for k in range(s.num_edges)]
    return AngleChart(s, values)


def test_flip_example():
    ch = octa_chart([0.5] * 12)
    e = ch.edge(0, 2)
    u, v, c1, c2, (A, B, C, D), _ = quad_of(ch.surface, e)
    vals = list(ch.values)
    for q, x in zip((A, B, C, D), (1.0, 1.2, 0.9, 1.1)):
        vals[q] = x
    vals[e] = -0.2
    new = flip(AngleChart(ch.surface, vals), e)
    assert new.values[e] == pytest.approx(0.2)
    assert [new.values[q] for q in (A, B, C, D)] == pytest.approx([0.9, 1.1, 0.8, 1.0])
    # the new diagonal joins the two opposite corners
    assert set(new.surface.edge_ends[e]) == {c1, c2}
    assert new.surface.is_sphere()
    # explicit u must match the chart
    assert flip(AngleChart(ch.surface, vals), e, u=0.1).values == new.values
    with pytest.raises(FlipError):
        flip(AngleChart(ch.surface, vals), e, u=0.3)


def test_flip_twice_is_identity():
    ch = octa_chart()
    e = ch.edge(0, 2)
    back = flip(flip(ch, e), e)
    assert back.values == ch.values
    assert {frozenset(x) for x in back.surface.edge_ends} == {frozenset(x) for x in ch.surface.edge_ends}


@settings(max_examples=50)
@given(st.lists(fracs, min_size=12, max_size=12), st.integers(0, 11))
def test_preserves_elementary_circuits_exactly(vals, e):
    ch = octa_chart(vals)
    try:
        quad_of(ch.surface, e)
    except FlipError:
        return
    rep = elementary_circuit_preservation(ch, e)
    assert rep.exact and rep.preserved
    assert all(r == 0 for r in rep.residuals)


def test_negative_control_wrong_decrements():
    ch = octa_chart()
    rep = elementary_circuit_preservation(ch, ch.edge(0, 2), _decrements=(1, 1, 2, 1))
    assert not rep.preserved


@settings(max_examples=30)
@given(st.lists(fracs, min_size=12, max_size=12), st.lists(fracs, min_size=12, max_size=12), fracs)
def test_transition_is_linear(x, y, a):
    ch = octa_chart()
    e = ch.edge(0, 2)
    fx = flip(octa_chart(x), e).values
    fy = flip(octa_chart(y), e).values
    fxy = flip(octa_chart([p + a * q for p, q in zip(x, y)]), e).values
    assert fxy == [p + a * q for p, q in zip(fx, fy)]


def test_convexity_probe():
    # crossing out of the valid region: diagonal 2s > 0 pushes quad edges above pi
    s_ = 0.1
    ch = octa_chart([math.pi] * 12)
    e = ch.edge(0, 2)
    vals = list(ch.values)
    vals[e] = 2 * s_
    _, _, _, _, quad, _ = quad_of(ch.surface, e)
    new = flip(AngleChart(ch.surface, vals), e)
    for q in range(12):
        if q in quad:
            assert new.values[q] == pytest.approx(math.pi + s_)
        elif q != e:
            assert new.values[q] == math.pi
    assert not new.is_valid()


def test_pentagon_holonomy():
    m = pentagon_holonomy()
    assert m == [[Fraction(28, 32), Fraction(-10, 32)], [Fraction(10, 32), Fraction(33, 32)]]
    assert det2(m) == 1
    assert all(isinstance(x, Fraction) for row in m for x in row)


def test_pentagon_sequence_returns_to_start():
    s = pentagon_surface()
    ch = AngleChart(s, [Fraction(0)] * s.num_edges)
    start = {frozenset(x) for x in s.edge_ends}
    for a, b in PENTAGON_FLIPS:
        ch = flip(ch, ch.edge(a, b))
    assert {frozenset(x) for x in ch.surface.edge_ends} == start


def test_square_holonomy_trivial():
    start, end = square_holonomy()
    assert start == end
    vals = [Fraction(k * k - 3, 11) for k in range(12)]
    start, end = square_holonomy(vals)
    assert end == vals


def test_quad_errors():
    # K4: flipping any edge would double an existing edge
    s = triangulation_from_faces(k4_graph())
    with pytest.raises(FlipError, match="repeated"):
        quad_of(s, 0)
    with pytest.raises(ValueError):
        AngleChart(s, [0] * 3)


def test_flipped_surface_keeps_counts():
    s = octahedron_surface()
    t = flipped_surface(s, AngleChart(s, [0] * 12).edge(0, 2))
    assert (t.num_vertices, t.num_edges, t.num_faces) == (6, 12, 8)
    assert sorted(t.vertex_degree(v) for v in range(6)) == [3, 3, 4, 4, 5, 5]
