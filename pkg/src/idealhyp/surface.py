"""Cellulated closed surfaces: boundary cellulations and their dual graphs."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class SurfaceError(ValueError):
    pass


@dataclass
class Surface:
    """A cellulation of a closed oriented surface.

    ``faces[f]`` lists the vertex ids of face ``f`` counterclockwise;
    ``face_edges[f][s]`` is the edge between ``faces[f][s]`` and
    ``faces[f][s+1]``.  Every edge borders exactly two face sides.
    """

    num_vertices: int
    faces: list[tuple[int, ...]]
    face_edges: list[tuple[int, ...]]
    edge_sides: list[list[tuple[int, int]]] = field(init=False)
    edge_ends: list[tuple[int, int]] = field(init=False)

    def __post_init__(self):
        if len(self.faces) != len(self.face_edges):
            raise SurfaceError("faces and face_edges differ in length")
        ne = 1 + max((e for fe in self.face_edges for e in fe), default=-1)
        sides: list[list[tuple[int, int]]] = [[] for _ in range(ne)]
        ends: list[tuple[int, int] | None] = [None] * ne
        for f, (verts, edges) in enumerate(zip(self.faces, self.face_edges)):
            if len(verts) != len(edges) or len(verts) < 3:
                raise SurfaceError(f"face {f} is malformed")
            for s, e in enumerate(edges):
                u, v = verts[s], verts[(s + 1) % len(verts)]
                sides[e].append((f, s))
                if ends[e] is None:
                    ends[e] = (u, v)
                elif ends[e] != (v, u):
                    raise SurfaceError(f"edge {e} is traversed inconsistently")
        for e, sd in enumerate(sides):
            if len(sd) != 2:
                raise SurfaceError(f"edge {e} borders {len(sd)} face sides, expected 2")
        self.edge_sides = sides
        self.edge_ends = [tuple(x) for x in ends]  # type: ignore[arg-type]

    @classmethod
    def from_faces(cls, faces: Sequence[Sequence[int]], num_vertices: int | None = None) -> "Surface":
        """Build from oriented vertex cycles, pairing sides (u, v) with (v, u)."""
        faces = [tuple(int(x) for x in f) for f in faces]
        ids: dict[tuple[int, int], int] = {}
        face_edges = []
        for f in faces:
            row = []
            for s in range(len(f)):
                u, v = f[s], f[(s + 1) % len(f)]
                key = (min(u, v), max(u, v))
                if key not in ids:
                    ids[key] = len(ids)
                row.append(ids[key])
            face_edges.append(tuple(row))
        if num_vertices is None:
            num_vertices = 1 + max(x for f in faces for x in f)
        return cls(num_vertices, faces, face_edges)

    @property
    def num_edges(self) -> int:
        return len(self.edge_sides)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def euler_characteristic(self) -> int:
        used = {v for f in self.faces for v in f}
        return len(used) - self.num_edges + self.num_faces

    def is_triangulation(self) -> bool:
        return all(len(f) == 3 for f in self.faces)

    def dual_edges(self) -> list[tuple[int, int]]:
        """Face pair across each edge (the dual graph, possibly with loops)."""
        return [(sd[0][0], sd[1][0]) for sd in self.edge_sides]

    def face_components(self) -> list[list[int]]:
        parent = list(range(self.num_faces))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.dual_edges():
            parent[find(a)] = find(b)
        comps = defaultdict(list)
        for f in range(self.num_faces):
            comps[find(f)].append(f)
        return [sorted(c) for c in sorted(comps.values())]

    def component_euler(self) -> list[tuple[list[int], int]]:
        out = []
        for comp in self.face_components():
            verts = {v for f in comp for v in self.faces[f]}
            edges = {e for f in comp for e in self.face_edges[f]}
            out.append((comp, len(verts) - len(edges) + len(comp)))
        return out

    def is_sphere(self) -> bool:
        comps = self.component_euler()
        return len(comps) == 1 and comps[0][1] == 2

    def edges_at_vertex(self, v: int) -> list[int]:
        """Edges incident to ``v`` in cyclic order around it.

        A loop edge at ``v`` appears twice.
        """
        return self.vertex_rotation(v)[0]

    def vertex_rotation(self, v: int) -> tuple[list[int], list[int]]:
        """(edges, faces) around ``v``; ``edges[q]`` separates ``faces[q]`` and ``faces[q+1]``."""
        # corners of v: (face, position); walk face-to-face around v
        corners = [(f, s) for f, verts in enumerate(self.faces) for s, x in enumerate(verts) if x == v]
        if not corners:
            return [], []
        seen = set()
        order: list[int] = []
        cfaces: list[int] = []
        f, s = corners[0]
        while (f, s) not in seen:
            seen.add((f, s))
            n = len(self.faces[f])
            # outgoing edge at corner (f, s) is face_edges[f][s]; incoming is [s-1]
            e_in = self.face_edges[f][(s - 1) % n]
            order.append(e_in)
            cfaces.append(f)
            # cross e_in to the neighbouring face; in that face the edge leaves v
            (f1, s1), (f2, s2) = self.edge_sides[e_in]
            other = (f2, s2) if (f1, s1) == (f, (s - 1) % n) else (f1, s1)
            f, s = other[0], other[1]
        if len(seen) != len(corners):
            raise SurfaceError(f"vertex {v} is not a manifold point")
        return order, cfaces

    def vertex_degree(self, v: int) -> int:
        return len(self.edges_at_vertex(v))

    def edge_vertex_incidence(self) -> list[tuple[int, int]]:
        return list(self.edge_ends)


def oriented_faces(triangles: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """Reorient polygons of a connected closed surface coherently (BFS).

    Raises if the surface is non-orientable or some edge is not shared by
    exactly two faces.
    """
    faces = [list(f) for f in triangles]
    owners = defaultdict(list)
    for i, f in enumerate(faces):
        for s in range(len(f)):
            u, v = f[s], f[(s + 1) % len(f)]
            owners[frozenset((u, v))].append(i)
    for key, own in owners.items():
        if len(own) != 2:
            raise SurfaceError(f"edge {sorted(key)} is in {len(own)} faces")
    fixed = [False] * len(faces)
    for start in range(len(faces)):
        if fixed[start]:
            continue
        fixed[start] = True
        stack = [start]
        while stack:
            i = stack.pop()
            f = faces[i]
            for s in range(len(f)):
                u, v = f[s], f[(s + 1) % len(f)]
                for j in owners[frozenset((u, v))]:
                    if j == i:
                        continue
                    g = faces[j]
                    pairs = {(g[t], g[(t + 1) % len(g)]) for t in range(len(g))}
                    if fixed[j]:
                        if (u, v) in pairs:
                            raise SurfaceError("surface is not orientable")
                        continue
                    if (u, v) in pairs:
                        g.reverse()
                    fixed[j] = True
                    stack.append(j)
    return [tuple(f) for f in faces]


@dataclass(frozen=True)
class Circuit:
    """Closed dual path: ``edges[q]`` separates ``faces[q]`` and ``faces[q+1]``."""

    edges: tuple[int, ...]
    faces: tuple[int, ...]
    kind: str  # "elementary" | "non-elementary"
    vertex: int | None = None
    contractible: str = "known"  # "known" | "declared" | "unknown"

    @property
    def elementary(self) -> bool:
        return self.kind == "elementary"

    def __len__(self) -> int:
        return len(self.edges)


def _vertex_stars(surface: Surface) -> dict[frozenset, int]:
    stars = {}
    for v in sorted({x for f in surface.faces for x in f}):
        es = surface.edges_at_vertex(v)
        stars[frozenset(es)] = v
    return stars


def simple_dual_cycles(surface: Surface, max_len: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All simple cycles of the dual multigraph with at most ``max_len`` edges.

    Each cycle is reported once as (edges, faces), starting from its
    smallest face.  Loops and parallel dual edges give cycles of length 1, 2.
    """
    adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for e, (a, b) in enumerate(surface.dual_edges()):
        adj[a].append((b, e))
        if a != b:
            adj[b].append((a, e))
    seen: set[frozenset] = set()
    out = []
    for s in range(surface.num_faces):
        for nb, e in adj[s]:
            if nb == s and frozenset([e]) not in seen:
                seen.add(frozenset([e]))
                out.append(((e,), (s,)))
        stack = [(s, (s,), ())]
        while stack:
            node, path, edges = stack.pop()
            for nb, e in adj[node]:
                if e in edges or nb == node:
                    continue
                if nb == s and len(edges) >= 1:
                    cyc = edges + (e,)
                    key = frozenset(cyc)
                    if key not in seen:
                        seen.add(key)
                        out.append((cyc, path))
                    continue
                if nb <= s or nb in path or len(edges) + 1 >= max_len:
                    continue
                stack.append((nb, path + (nb,), edges + (e,)))
    out.sort(key=lambda c: (len(c[0]), c[0]))
    return out


def enumerate_circuits(
    surface: Surface,
    max_len: int = 12,
    declared: Iterable[Iterable[int]] = (),
) -> tuple[list[Circuit], bool]:
    """Elementary circuits (one per vertex) plus short non-elementary ones.

    Returns ``(circuits, complete)``; ``complete`` is False when the search
    bound ``max_len`` may have cut off longer non-elementary cycles.
    Contractibility of non-elementary circuits is "known" on sphere
    components, "declared" when listed in ``declared`` (edge sets), and
    "unknown" otherwise.
    """
    if max_len < 1:
        raise ValueError("max_len must be positive")
    declared_sets = {frozenset(d) for d in declared}
    comp_of_face = {}
    sphere_comp = {}
    for ci, (comp, chi) in enumerate(surface.component_euler()):
        for f in comp:
            comp_of_face[f] = ci
        sphere_comp[ci] = chi == 2
    out = []
    for v in sorted({x for f in surface.faces for x in f}):
        es, faces = surface.vertex_rotation(v)
        out.append(Circuit(tuple(es), tuple(faces), "elementary", v, "known"))
    stars = _vertex_stars(surface)
    for edges, faces in simple_dual_cycles(surface, max_len):
        key = frozenset(edges)
        if key in stars and len(edges) == len(surface.edges_at_vertex(stars[key])):
            continue
        if sphere_comp[comp_of_face[faces[0]]]:
            status = "known"
        elif key in declared_sets:
            status = "declared"
        else:
            status = "unknown"
        out.append(Circuit(tuple(edges), tuple(faces), "non-elementary", None, status))
    complete = surface.num_faces <= max_len
    return out, complete
