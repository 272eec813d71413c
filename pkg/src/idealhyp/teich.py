"""Diagonal flips on boundary triangulations and the affine transition maps
between adjacent cells of exterior-angle space.

Crossing the wall where the diagonal e1 of a quadrilateral carries -2u, the
chart on the flipped triangulation has 2u on the new diagonal and each of the
four quadrilateral edges lowered by u.  Values are kept as Fractions when
given as such, so holonomies are computed exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .surface import Surface


class FlipError(ValueError):
    pass


@dataclass
class AngleChart:
    surface: Surface
    values: list  # exterior angle per edge id (Fraction or float)

    def __post_init__(self):
        self.values = list(self.values)
        if len(self.values) != self.surface.num_edges:
            raise ValueError("one value per edge is required")
        if not self.surface.is_triangulation():
            raise ValueError("charts live on triangulations")

    def edge(self, u: int, v: int) -> int:
        key = {u, v}
        for e, (a, b) in enumerate(self.surface.edge_ends):
            if {a, b} == key:
                return e
        raise KeyError(f"no edge {u}-{v}")

    def value(self, u: int, v: int):
        return self.values[self.edge(u, v)]

    def vertex_sums(self) -> list:
        s = self.surface
        return [sum((self.values[e] for e in s.edges_at_vertex(v)), Fraction(0)) for v in range(s.num_vertices)]

    def is_valid(self) -> bool:
        import math

        return all(0 < float(x) < math.pi for x in self.values)


def quad_of(s: Surface, e: int):
    """(u, v, c1, c2, (A, B, C, D)) for the quadrilateral around edge e.

    The two triangles are (u, v, c1) and (v, u, c2); A = u c2, B = c2 v,
    C = v c1, D = c1 u are the boundary edges of the quadrilateral.
    """
    (f1, s1), (f2, s2) = s.edge_sides[e]
    if f1 == f2:
        raise FlipError(f"edge {e} borders one face twice")
    t1, t2 = s.faces[f1], s.faces[f2]
    u, v, c1 = t1[s1], t1[(s1 + 1) % 3], t1[(s1 + 2) % 3]
    c2 = t2[(s2 + 2) % 3]
    fe1, fe2 = s.face_edges[f1], s.face_edges[f2]
    A, B = fe2[(s2 + 1) % 3], fe2[(s2 + 2) % 3]
    C, D = fe1[(s1 + 1) % 3], fe1[(s1 + 2) % 3]
    if len({u, v, c1, c2}) != 4 or len({A, B, C, D, e}) != 5:
        raise FlipError(f"quadrilateral around edge {e} is not embedded")
    if any({a, b} == {c1, c2} for a, b in s.edge_ends):
        raise FlipError(f"flipping edge {e} would create a repeated edge {c1}-{c2}")
    return u, v, c1, c2, (A, B, C, D), (f1, f2)


def flipped_surface(s: Surface, e: int) -> Surface:
    """Replace diagonal e by the other diagonal; the new diagonal keeps id e."""
    u, v, c1, c2, (A, B, C, D), (f1, f2) = quad_of(s, e)
    faces = list(s.faces)
    fedges = list(s.face_edges)
    faces[f1], fedges[f1] = (c2, v, c1), (B, C, e)
    faces[f2], fedges[f2] = (c1, u, c2), (D, A, e)
    return Surface(s.num_vertices, faces, fedges)


def _flip(chart: AngleChart, e: int, u=None, decrements: Sequence[int] = (1, 1, 1, 1)) -> AngleChart:
    old = chart.values[e]
    if u is None:
        u = -old / 2
    elif old != -2 * u and abs(float(old) + 2 * float(u)) > 1e-12:
        raise FlipError(f"chart value at edge {e} is {old}, not -2u = {-2 * u}")
    _, _, _, _, quad, _ = quad_of(chart.surface, e)
    vals = list(chart.values)
    vals[e] = 2 * u
    for q, k in zip(quad, decrements):
        vals[q] = vals[q] - k * u
    return AngleChart(flipped_surface(chart.surface, e), vals)


def flip(chart: AngleChart, e: int, u=None) -> AngleChart:
    """Transition across the wall where diagonal e vanishes.

    ``u`` defaults to minus half the chart value at e; when given it must
    match that value.
    """
    return _flip(chart, e, u)


@dataclass
class PreservationReport:
    before: list
    after: list
    residuals: list
    exact: bool

    @property
    def preserved(self) -> bool:
        if self.exact:
            return all(r == 0 for r in self.residuals)
        return all(abs(float(r)) <= 1e-12 for r in self.residuals)


def elementary_circuit_preservation(chart: AngleChart, e: int, u=None, _decrements=(1, 1, 1, 1)) -> PreservationReport:
    new = _flip(chart, e, u, _decrements)
    before, after = chart.vertex_sums(), new.vertex_sums()
    exact = all(isinstance(x, (int, Fraction)) for x in chart.values) and (u is None or isinstance(u, (int, Fraction)))
    return PreservationReport(before, after, [a - b for a, b in zip(after, before)], exact)


# ---------------------------------------------------------------- holonomy


def pentagon_surface() -> Surface:
    """Pentagon 0..4 with outer apex 5; inner diagonals 02, 03."""
    inner = [(0, 1, 2), (0, 2, 3), (0, 3, 4)]
    outer = [((i + 1) % 5, i, 5) for i in range(5)]
    return Surface.from_faces(inner + outer)


PENTAGON_FLIPS = ((0, 2), (0, 3), (1, 3), (1, 4), (2, 4))


def pentagon_holonomy() -> list[list[Fraction]]:
    """Linear part of the five transition maps around the pentagon cell.

    Coordinates are (x, y) = (value at 03, value at 02).  Each flip removes
    the older diagonal; after five flips the diagonals are again 03 and 02.
    """
    cols = []
    for x, y in ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))):
        s = pentagon_surface()
        chart = AngleChart(s, [Fraction(0)] * s.num_edges)
        vals = list(chart.values)
        vals[chart.edge(0, 3)] = x
        vals[chart.edge(0, 2)] = y
        chart = AngleChart(s, vals)
        for a, b in PENTAGON_FLIPS:
            chart = flip(chart, chart.edge(a, b))
        cols.append((chart.value(0, 3), chart.value(0, 2)))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]


def det2(m) -> Fraction:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def octahedron_surface() -> Surface:
    tris = []
    for k in range(4):
        a, b = 2 + k, 2 + (k + 1) % 4
        tris.append((0, a, b))
        tris.append((1, b, a))
    return Surface.from_faces(tris)


def square_holonomy(values: Sequence[Fraction] | None = None) -> tuple[list, list]:
    """Loop around a codimension-2 cell where two disjoint quadrilaterals degenerate.

    On the octahedron, the quadrilaterals around edges N e0 and S e1 are
    disjoint; flip both diagonals and flip them back.  Returns the chart
    values before and after the loop.
    """
    s = octahedron_surface()
    if values is None:
        values = [Fraction(k + 1, 7) for k in range(s.num_edges)]
    chart = AngleChart(s, list(values))
    e, f = chart.edge(0, 2), chart.edge(1, 3)
    start = list(chart.values)
    for edge in (e, f, e, f):
        chart = flip(chart, edge)
    return start, [chart.value(*s.edge_ends[k]) for k in range(s.num_edges)]
