"""Ideal triangulated 3-manifolds with boundary, built from face gluings.

Conventions (fixed throughout the package):

* tetrahedron vertices are 0..3 and every tetrahedron is positively oriented
  by its labeling;
* face ``f`` is the face opposite vertex ``f``;
* edge slots are indexed lexicographically, 0..5 = 01, 02, 03, 12, 13, 23;
  opposite edges share an angle, slot ``k`` carries angle ``EDGE_PAIR[k]``;
* a gluing ``(t, f) -> (t2, f2, perm)`` maps vertex ``i`` of ``t`` to vertex
  ``perm[i]`` of ``t2`` and must be an odd permutation (orientation reversing
  on the shared face).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional, Sequence

import numpy as np

from .surface import Surface

EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = {e: k for k, e in enumerate(EDGES)} | {(j, i): k for k, (i, j) in enumerate(EDGES)}
EDGE_PAIR = (0, 1, 2, 2, 1, 0)
# outward-oriented boundary of the positively oriented simplex [0,1,2,3]
FACE_VERTS = ((1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1))

Gluing = Optional[tuple[int, int, tuple[int, int, int, int]]]


class ComplexValidationError(ValueError):
    """Invalid gluing data; ``tet`` and ``face`` name the offending face."""

    def __init__(self, message: str, tet: int | None = None, face: int | None = None):
        self.tet = tet
        self.face = face
        where = f" at (tet {tet}, face {face})" if tet is not None else ""
        super().__init__(message + where)


def perm_sign(p: Sequence[int]) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


@dataclass
class GluingData:
    num_tets: int
    gluings: list[list[Gluing]]

    def validate(self) -> None:
        if len(self.gluings) != self.num_tets:
            raise ComplexValidationError("gluing table has wrong number of rows")
        for t, row in enumerate(self.gluings):
            if len(row) != 4:
                raise ComplexValidationError("tetrahedron needs four face entries", t, None)
            for f, g in enumerate(row):
                if g is None:
                    continue
                t2, f2, p = g
                if not (0 <= t2 < self.num_tets) or not (0 <= f2 < 4):
                    raise ComplexValidationError("gluing target out of range", t, f)
                if sorted(p) != [0, 1, 2, 3] or p[f] != f2:
                    raise ComplexValidationError("gluing permutation does not map face to face", t, f)
                if (t2, f2) == (t, f):
                    raise ComplexValidationError("face glued to itself", t, f)
                back = self.gluings[t2][f2]
                if back is None or back[0] != t or back[1] != f or tuple(back[2]) != perm_inverse(p):
                    raise ComplexValidationError("gluing is not involutive", t, f)
                if perm_sign(p) != -1:
                    raise ComplexValidationError("gluing preserves orientation", t, f)


@dataclass
class EdgeClass:
    index: int
    interior: bool
    slots: list[tuple[int, int]]  # (tet, edge slot) in cyclic order around the edge
    ends: tuple[int, int]  # vertex classes

    @property
    def valence(self) -> int:
        return len(self.slots)


@dataclass
class IdealComplex:
    gluing: GluingData
    edge_of_slot: np.ndarray  # (n, 6)
    vertex_of_slot: np.ndarray  # (n, 4)
    edge_classes: list[EdgeClass]
    num_vertices: int
    boundary: Surface  # edge ids are edge-class ids restricted to boundary edges
    boundary_faces: list[tuple[int, int]]
    boundary_edge_ids: list[int]  # surface edge id -> edge class
    surface_edge_of_class: dict[int, int] = field(default_factory=dict)

    @property
    def num_tets(self) -> int:
        return self.gluing.num_tets

    @property
    def interior_edges(self) -> list[int]:
        return [e.index for e in self.edge_classes if e.interior]

    @property
    def boundary_edges(self) -> list[int]:
        return [e.index for e in self.edge_classes if not e.interior]

    def counts(self) -> dict[str, int]:
        return {
            "f": self.num_tets,
            "e_i": len(self.interior_edges),
            "e_b": len(self.boundary_edges),
            "v": self.num_vertices,
        }

    def is_ball(self) -> bool:
        return self.boundary.is_sphere()


def _union_find(n):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    return find, union


def _canonical_labels(find, n):
    labels, out = {}, []
    for x in range(n):
        r = find(x)
        if r not in labels:
            labels[r] = len(labels)
        out.append(labels[r])
    return out


def build_complex(g: GluingData) -> IdealComplex:
    """Derive edge classes, vertex classes and the boundary cellulation."""
    g.validate()
    n = g.num_tets
    vfind, vunion = _union_find(4 * n)
    for t, row in enumerate(g.gluings):
        for f, gl in enumerate(row):
            if gl is None:
                continue
            t2, _, p = gl
            for v in range(4):
                if v != f:
                    vunion(4 * t + v, 4 * t2 + p[v])
    vlab = _canonical_labels(vfind, 4 * n)
    vertex_of_slot = np.array(vlab, dtype=int).reshape(n, 4) if n else np.zeros((0, 4), int)
    nv = max(vlab) + 1 if vlab else 0

    edge_of_slot = -np.ones((n, 6), dtype=int)
    classes: list[EdgeClass] = []

    def walk(t, i, j, k, l):
        """Walk from slot (t, ij) leaving through the face opposite l."""
        out = []
        start = (t, i, j)
        while True:
            gl = g.gluings[t][l]
            if gl is None:
                return out, False
            t2, _, p = gl
            t, i, j, k, l = t2, p[i], p[j], p[l], p[k]
            if (t, i, j) == start:
                return out, True
            if (t, j, i) == start:
                raise ComplexValidationError("edge identified with itself reversed", t, l)
            if len(out) > 6 * n:
                raise ComplexValidationError("edge orbit does not close", t, l)
            out.append((t, EDGE_INDEX[(i, j)]))

    for t in range(n):
        for s, (i, j) in enumerate(EDGES):
            if edge_of_slot[t, s] >= 0:
                continue
            k, l = [x for x in range(4) if x not in (i, j)]
            fwd, closed = walk(t, i, j, k, l)
            if closed:
                slots = [(t, s)] + fwd
            else:
                back, closed2 = walk(t, i, j, l, k)
                if closed2:
                    raise ComplexValidationError("inconsistent edge orbit", t, k)
                slots = [x for x in reversed(back)] + [(t, s)] + fwd
            idx = len(classes)
            for (tt, ss) in slots:
                if edge_of_slot[tt, ss] >= 0:
                    raise ComplexValidationError("edge slot reached twice in one orbit", tt, None)
                edge_of_slot[tt, ss] = idx
            a, b = EDGES[s]
            classes.append(EdgeClass(idx, closed, slots, (vlab[4 * t + a], vlab[4 * t + b])))

    # boundary surface
    bfaces, bface_verts, bface_edges = [], [], []
    for t in range(n):
        for f in range(4):
            if g.gluings[t][f] is None:
                verts = FACE_VERTS[f]
                bfaces.append((t, f))
                bface_verts.append(tuple(int(vertex_of_slot[t, v]) for v in verts))
                bface_edges.append(
                    tuple(int(edge_of_slot[t, EDGE_INDEX[(verts[q], verts[(q + 1) % 3])]]) for q in range(3))
                )
    bclasses = sorted({e for fe in bface_edges for e in fe})
    sid = {c: q for q, c in enumerate(bclasses)}
    surface = Surface(nv, bface_verts, [tuple(sid[e] for e in fe) for fe in bface_edges])
    for c in classes:
        if not c.interior and c.index not in sid:
            raise ComplexValidationError("boundary edge class missing from boundary surface")

    cx = IdealComplex(g, edge_of_slot, vertex_of_slot, classes, nv, surface, bfaces, bclasses, sid)
    _check_vertex_links(cx)
    return cx


def _check_vertex_links(cx: IdealComplex) -> None:
    g = cx.gluing
    nv = cx.num_vertices
    F = np.zeros(nv, int)
    V = np.zeros(nv, int)
    Eb = np.zeros(nv, int)
    Ei2 = np.zeros(nv, int)
    for t in range(cx.num_tets):
        for v in range(4):
            F[cx.vertex_of_slot[t, v]] += 1
        for f in range(4):
            for v in range(4):
                if v == f:
                    continue
                c = cx.vertex_of_slot[t, v]
                if g.gluings[t][f] is None:
                    Eb[c] += 1
                else:
                    Ei2[c] += 1
    for ec in cx.edge_classes:
        V[ec.ends[0]] += 1
        V[ec.ends[1]] += 1
    chi = V - (Eb + Ei2 // 2) + F
    for c in range(nv):
        t, v = map(int, np.argwhere(cx.vertex_of_slot == c)[0])
        if Eb[c] == 0:
            raise ComplexValidationError(f"vertex class {c} has a closed link (interior vertex)", t, None)
        if chi[c] != 1:
            raise ComplexValidationError(f"link of vertex class {c} is not a disk (chi={chi[c]})", t, None)


def euler_check(cx: IdealComplex, counts: dict[str, int] | None = None) -> bool:
    """2 f = 2 e_i + e_b - v."""
    c = cx.counts() if counts is None else counts
    return 2 * c["f"] == 2 * c["e_i"] + c["e_b"] - c["v"]


def complex_from_tets(tets: Sequence[Sequence[int]]) -> GluingData:
    """Gluing data from tetrahedra given as vertex-label 4-tuples.

    Faces with the same label set are glued; labels must be distinct inside
    each tetrahedron and a face may be shared by at most two tetrahedra.
    """
    owners = defaultdict(list)
    for t, labels in enumerate(tets):
        if len(set(labels)) != 4:
            raise ComplexValidationError("repeated vertex label", t, None)
        for f in range(4):
            key = frozenset(labels[v] for v in range(4) if v != f)
            owners[key].append((t, f))
    gl: list[list[Gluing]] = [[None] * 4 for _ in tets]
    for key, own in owners.items():
        if len(own) > 2:
            raise ComplexValidationError("face shared by more than two tetrahedra", own[2][0], own[2][1])
        if len(own) == 2:
            (t1, f1), (t2, f2) = own
            pos2 = {lab: i for i, lab in enumerate(tets[t2])}
            p = tuple(pos2[tets[t1][i]] if i != f1 else f2 for i in range(4))
            gl[t1][f1] = (t2, f2, p)
            gl[t2][f2] = (t1, f1, perm_inverse(p))
    return GluingData(len(tets), gl)


def odd_permutations() -> list[tuple[int, ...]]:
    return [p for p in permutations(range(4)) if perm_sign(p) == -1]
