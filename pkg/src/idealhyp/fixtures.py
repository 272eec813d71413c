"""Small complexes and targets used by tests, scripts and the shipped fixture files."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .angles import AngleTarget
from .complex import GluingData, IdealComplex, build_complex, complex_from_tets, perm_sign

HALF_PI = math.pi / 2


def orient_tets(tets: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Relabel vertex orders so every shared face is glued orientation-reversingly."""
    tets = [list(t) for t in tets]
    g = complex_from_tets(tets)
    fixed = [False] * len(tets)
    for start in range(len(tets)):
        if fixed[start]:
            continue
        fixed[start] = True
        stack = [start]
        while stack:
            t = stack.pop()
            g = complex_from_tets(tets)
            for gl in g.gluings[t]:
                if gl is None:
                    continue
                t2, _, p = gl
                odd = perm_sign(p) == -1
                if fixed[t2]:
                    if not odd:
                        raise ValueError("tetrahedra cannot be oriented coherently")
                    continue
                if not odd:
                    tets[t2][0], tets[t2][1] = tets[t2][1], tets[t2][0]
                fixed[t2] = True
                stack.append(t2)
    return [tuple(t) for t in tets]


def single_tet() -> IdealComplex:
    return build_complex(GluingData(1, [[None] * 4]))


def solid_torus() -> IdealComplex:
    """One tet with face 0 glued to face 1: a solid torus whose boundary is a 2-triangle torus."""
    return build_complex(GluingData(1, [[(0, 1, (1, 2, 3, 0)), (0, 0, (3, 0, 1, 2)), None, None]]))


def bipyramid() -> IdealComplex:
    return build_complex(complex_from_tets(orient_tets([(0, 1, 2, 3), (4, 1, 2, 3)])))


def cone_octahedron() -> IdealComplex:
    """Four tets (N, S, e_k, e_k+1) around the interior edge N-S.

    Labels: N = 0, S = 1, equator e_k = 2 + k.
    """
    tets = [(0, 1, 2 + k, 2 + (k + 1) % 4) for k in range(4)]
    return build_complex(complex_from_tets(orient_tets(tets)))


def vertex_labels(cx: IdealComplex, tets: Sequence[Sequence[int]]) -> dict[int, int]:
    """Vertex class -> label for a complex built from labelled tets."""
    out = {}
    for t, lab in enumerate(tets):
        for v in range(4):
            out[int(cx.vertex_of_slot[t, v])] = lab[v]
    return out


def labelled_complex(tets: Sequence[Sequence[int]]):
    """(complex, oriented tets, class -> label, label pair -> edge class)."""
    tets = orient_tets(tets)
    cx = build_complex(complex_from_tets(tets))
    lab = vertex_labels(cx, tets)
    edge_by_labels = {}
    for ec in cx.edge_classes:
        key = frozenset(lab[v] for v in ec.ends)
        edge_by_labels[key] = ec.index
    return cx, tets, lab, edge_by_labels


def regular_target(cx: IdealComplex) -> AngleTarget:
    """Single tet with every boundary edge at pi/3."""
    return AngleTarget.from_boundary(cx, {e: math.pi / 3 for e in cx.boundary_edges})


def right_angled_target(cx: IdealComplex) -> AngleTarget:
    return AngleTarget.from_boundary(cx, {e: HALF_PI for e in cx.boundary_edges})


def cone_octahedron_labelled():
    return labelled_complex([(0, 1, 2 + k, 2 + (k + 1) % 4) for k in range(4)])


# Exterior angles making the circuit around the triangle N e0 e1 sum to 2 pi
DEGENERATE_EXTERIOR = {
    frozenset(p): w
    for ps, w in (
        (((0, 2), (0, 3), (2, 3), (1, 4), (1, 5), (4, 5)), 2 * math.pi / 3),
        (((0, 4), (0, 5), (2, 5), (1, 2), (3, 4), (1, 3)), math.pi / 3),
    )
    for p in ps
}


def degenerate_target():
    """Cone-over-octahedron with a non-elementary 6-circuit summing to 2 pi."""
    cx, tets, lab, ebl = cone_octahedron_labelled()
    bnd = {}
    for ec in cx.edge_classes:
        if ec.interior:
            continue
        key = frozenset(lab[v] for v in ec.ends)
        bnd[ec.index] = math.pi - DEGENERATE_EXTERIOR[key]
    return cx, AngleTarget.from_boundary(cx, bnd)


def octahedron_graph() -> list[tuple[int, int, int]]:
    """Triangles of the octahedron, vertices N=0, S=1, equator 2..5."""
    tris = []
    for k in range(4):
        a, b = 2 + k, 2 + (k + 1) % 4
        tris.append((0, a, b))
        tris.append((1, b, a))
    return tris


def k4_graph() -> list[tuple[int, int, int]]:
    return [(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)]


def icosahedron_graph() -> list[tuple[int, int, int]]:
    """Triangles of the icosahedron: poles 0, 11, upper ring 1..5, lower ring 6..10."""
    tris = []
    for k in range(5):
        u0, u1 = 1 + k, 1 + (k + 1) % 5
        l0, l1 = 6 + k, 6 + (k + 1) % 5
        tris.append((0, u0, u1))
        tris.append((u0, l0, u1))
        tris.append((u1, l0, l1))
        tris.append((11, l1, l0))
    return tris


def standard_octahedron_points() -> list[complex]:
    return [0j, complex("inf"), 1 + 0j, -1 + 0j, 1j, -1j]


def random_sphere_points(n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(n, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
