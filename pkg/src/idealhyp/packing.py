"""Delaunay cellulations of points on the sphere, orthogonal-circle augmentation,
Koebe packings through right-angled ideal structures, and SVG output."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import root
from scipy.spatial import ConvexHull

from .angles import AngleTarget, DihedralData, validate_dihedral_data
from .geom import Cap, apply, cap_through, develop, from_sphere, inversive_product, to_sphere
from .solver import SolveOptions, solve_structure
from .surface import Surface, SurfaceError, oriented_faces

COPLANAR_TOL = 1e-10
EMPTY_MARGIN = -1e-9


class DelaunayError(ValueError):
    pass


class PackingError(ValueError):
    def __init__(self, message: str, certificate: Optional[dict] = None):
        self.certificate = certificate or {}
        super().__init__(message)


# ---------------------------------------------------------------- Delaunay


def _orient_sign_exact(a, b, c, d) -> int:
    """Exact sign of det[b - a, c - a, d - a] for float inputs."""
    fa, fb, fc, fd = ([Fraction(float(x)) for x in p] for p in (a, b, c, d))
    u = [fb[i] - fa[i] for i in range(3)]
    v = [fc[i] - fa[i] for i in range(3)]
    w = [fd[i] - fa[i] for i in range(3)]
    det = (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )
    return (det > 0) - (det < 0)


def normalized_det(a, b, c, d) -> float:
    u, v, w = b - a, c - a, d - a
    scale = np.linalg.norm(u) * np.linalg.norm(v) * np.linalg.norm(w)
    return float(np.linalg.det(np.array([u, v, w])) / scale) if scale > 0 else 0.0


@dataclass
class DelaunayCellulation:
    points: np.ndarray
    surface: Surface
    normals: np.ndarray  # outward unit normal per cell
    offsets: np.ndarray  # plane offset per cell: n . x = d on the cell

    def margins(self) -> np.ndarray:
        """Per cell, min over other points of d - n . x (>= 0 when the circumdisk is empty)."""
        out = []
        for f, verts in enumerate(self.surface.faces):
            others = np.setdiff1d(np.arange(len(self.points)), verts)
            if len(others) == 0:
                out.append(np.inf)
                continue
            out.append(float(np.min(self.offsets[f] - self.points[others] @ self.normals[f])))
        return np.array(out)

    def is_empty_circumdisk(self, margin: float = EMPTY_MARGIN) -> bool:
        return bool(np.all(self.margins() >= margin))


def delaunay_on_sphere(pts) -> DelaunayCellulation:
    """Convex hull of unit vectors, coplanar facets merged into polygonal cells."""
    P = np.asarray(pts, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3:
        raise DelaunayError("points must be an (n, 3) array")
    if len(P) < 4:
        raise DelaunayError("at least 4 points are required")
    if not np.allclose(np.linalg.norm(P, axis=1), 1.0, atol=1e-9):
        raise DelaunayError("points must be unit vectors")
    diff = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(len(P))
    if np.min(diff) < 1e-12:
        raise DelaunayError("points must be pairwise distinct")
    sv = np.linalg.svd(P - P.mean(axis=0), compute_uv=False)
    if sv[-1] < COPLANAR_TOL * sv[0]:
        raise DelaunayError("all points lie on one circle")
    hull = ConvexHull(P)
    if len(hull.vertices) != len(P):
        raise DelaunayError("some points are not hull vertices")
    tris = []
    for simp, eq in zip(hull.simplices, hull.equations):
        a, b, c = (int(x) for x in simp)
        if np.cross(P[b] - P[a], P[c] - P[a]) @ eq[:3] < 0:
            b, c = c, b
        tris.append((a, b, c))

    # merge coplanar neighbours
    parent = list(range(len(tris)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = {}
    for i, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            owner[(u, v)] = i
    for i, (a, b, c) in enumerate(tris):
        for u, v in ((a, b), (b, c), (c, a)):
            j = owner[(v, u)]
            if j <= i:
                continue
            d = [x for x in tris[j] if x not in (u, v)][0]
            if abs(normalized_det(P[a], P[b], P[c], P[d])) < COPLANAR_TOL:
                parent[find(j)] = find(i)
            elif _orient_sign_exact(P[a], P[b], P[c], P[d]) > 0:
                raise DelaunayError("hull is not locally convex (numerical failure)")
    groups: dict[int, list[int]] = {}
    for i in range(len(tris)):
        groups.setdefault(find(i), []).append(i)
    faces, normals, offsets = [], [], []
    for members in sorted(groups.values()):
        directed = {(u, v) for i in members for u, v in zip(tris[i], tris[i][1:] + tris[i][:1])}
        rim = {u: v for (u, v) in directed if (v, u) not in directed}
        start = min(rim)
        cyc = [start]
        while rim[cyc[-1]] != start:
            cyc.append(rim[cyc[-1]])
            if len(cyc) > len(rim):
                raise DelaunayError("merged cell is not a disk")
        if len(cyc) != len(rim):
            raise DelaunayError("merged cell is not a disk")
        n = np.zeros(3)
        for i in members:
            a, b, c = tris[i]
            n += np.cross(P[b] - P[a], P[c] - P[a])
        n /= np.linalg.norm(n)
        faces.append(tuple(cyc))
        normals.append(n)
        offsets.append(float(np.mean(P[cyc] @ n)))
    surface = Surface.from_faces(faces, len(P))
    return DelaunayCellulation(P, surface, np.array(normals), np.array(offsets))


def brute_force_delaunay_triples(P: np.ndarray, tol: float = 1e-9) -> set[frozenset]:
    """All triples whose plane has every other point weakly on one side."""
    n = len(P)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                nrm = np.cross(P[j] - P[i], P[k] - P[i])
                nrm /= np.linalg.norm(nrm)
                s = (P - P[i]) @ nrm
                s[[i, j, k]] = 0
                if np.all(s <= tol) or np.all(s >= -tol):
                    out.add(frozenset((i, j, k)))
    return out


# ---------------------------------------------------------------- augmentation


@dataclass
class AugmentedData(DihedralData):
    """Dihedral data of the augmented cellulation.

    Faces ``0..nv-1`` are White (one per input vertex), the rest Black (one per
    input face).  Vertex ``e`` of the augmented cellulation is input edge ``e``.
    """

    roles: tuple[str, ...] = ()
    source: Optional[Surface] = None
    claim: str = "non-elementary circuits have more than 4 edges"


def thurston_augment(tri: Surface, allow_polygons: bool = False) -> AugmentedData:
    if not allow_polygons and not tri.is_triangulation():
        bad = next(f for f, v in enumerate(tri.faces) if len(v) != 3)
        raise SurfaceError(f"face {bad} is not a triangle")
    used = sorted({v for f in tri.faces for v in f})
    if used != list(range(tri.num_vertices)):
        raise SurfaceError("vertices must be numbered 0..n-1 without gaps")
    faces, roles = [], []
    for v in range(tri.num_vertices):
        faces.append(tuple(tri.vertex_rotation(v)[0]))
        roles.append("White")
    for fe in tri.face_edges:
        faces.append(tuple(fe))
        roles.append("Black")
    med = Surface.from_faces(faces, tri.num_edges)
    return AugmentedData(med, np.full(med.num_edges, math.pi / 2), (), tuple(roles), tri)


# ---------------------------------------------------------------- coning


def choose_apex(s: Surface) -> int:
    deg = [(s.vertex_degree(v), -v) for v in range(s.num_vertices)]
    return -max(deg)[1]


def cone_ball(s: Surface, apex: int) -> tuple[list[tuple[int, int, int, int]], list[tuple[int, int]]]:
    """Tets (apex, a, b, c) over a triangulation of the faces missing the apex.

    Faces through the apex are fanned from it; others from their first vertex.
    Returns the tets and the added diagonals.
    """
    tris, diags = [], []
    for verts in s.faces:
        verts = list(verts)
        if apex in verts:
            i = verts.index(apex)
            verts = verts[i:] + verts[:i]
        for q in range(1, len(verts) - 1):
            tris.append((verts[0], verts[q], verts[q + 1]))
            if q > 1:
                diags.append((verts[0], verts[q]))
    tets = [(apex, a, b, c) for a, b, c in tris if apex not in (a, b, c)]
    return tets, diags


def ball_from_cellulation(s: Surface, exterior: np.ndarray, apex: int):
    """Ball complex coning ``s`` from ``apex`` with boundary targets pi - exterior."""
    from .fixtures import labelled_complex

    tets, diags = cone_ball(s, apex)
    cx, tets, lab, ebl = labelled_complex(tets)
    edge_of_pair = {frozenset(s.edge_ends[e]): e for e in range(s.num_edges)}
    diag_set = {frozenset(d) for d in diags}
    bnd, flat = {}, []
    for ec in cx.edge_classes:
        if ec.interior:
            continue
        key = frozenset(lab[v] for v in ec.ends)
        if key in edge_of_pair:
            bnd[ec.index] = math.pi - float(exterior[edge_of_pair[key]])
        elif key in diag_set:
            bnd[ec.index] = math.pi
            flat.append(ec.index)
        else:
            raise PackingError(f"boundary edge {sorted(key)} is neither a cell edge nor a diagonal")
    return cx, tets, lab, AngleTarget.from_boundary(cx, bnd, flat)


# ---------------------------------------------------------------- circle configurations


@dataclass
class Incidence:
    i: int
    j: int
    kind: str  # "tangent" | "angle"
    angle: float  # exterior intersection angle; pi for tangency
    residual: float


@dataclass
class CircleConfig:
    caps: list[Cap]
    roles: list[str]
    labels: list[str]
    incidences: list[Incidence] = field(default_factory=list)
    points: Optional[np.ndarray] = None  # tangency / intersection points on S^2
    info: dict = field(default_factory=dict)

    def white(self) -> list[int]:
        return [k for k, r in enumerate(self.roles) if r == "White"]

    def black(self) -> list[int]:
        return [k for k, r in enumerate(self.roles) if r == "Black"]

    def max_tangency_residual(self) -> float:
        return max((x.residual for x in self.incidences if x.kind == "tangent"), default=0.0)

    def max_angle_residual(self) -> float:
        return max((x.residual for x in self.incidences if x.kind == "angle"), default=0.0)


def caps_from_points(s: Surface, X: np.ndarray) -> tuple[list[Cap], np.ndarray]:
    """Outer cap of every face of ``s`` through the points ``X`` (rows on S^2)."""
    caps, resid = [], []
    for verts in s.faces:
        cap = cap_through(X[list(verts[:3])])
        others = np.setdiff1d(np.arange(len(X)), verts)
        if len(others) and np.mean(X[others] @ cap.normal - cap.d) > 0:
            cap = cap.flipped()
        caps.append(cap)
        resid.append(float(np.max(np.abs(X[list(verts)] @ cap.normal - cap.d))))
    return caps, np.array(resid)


def ball_automorphism(a: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Conformal automorphism of the ball sending a to 0, applied to points of S^2."""
    a = np.asarray(a, dtype=float)
    aa = a @ a
    diff = X - a
    nd = np.sum(diff**2, axis=1, keepdims=True)
    Y = ((1 - aa) * diff - nd * a) / nd
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def centre_points(X: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Moebius-normalize so the R^3 centroid of the points is the origin."""
    c = X.mean(axis=0)
    if np.linalg.norm(c) < tol:
        return X
    sol = root(lambda a: ball_automorphism(a, X).mean(axis=0), np.zeros(3), method="hybr", tol=1e-15)
    Y = ball_automorphism(sol.x, X)
    if np.linalg.norm(Y.mean(axis=0)) > 1e-9:
        raise PackingError("centroid normalization did not converge")
    return Y


def configuration(aug: AugmentedData, X: np.ndarray) -> CircleConfig:
    """Circles of the augmented faces through the points X (one per input edge)."""
    med = aug.surface
    caps, resid = caps_from_points(med, X)
    tri = aug.source
    labels = [f"W{v}" for v in range(tri.num_vertices)] + [f"B{f}" for f in range(tri.num_faces)]
    inc = []
    nw = tri.num_vertices
    for e, (u, v) in enumerate(tri.edge_ends):
        ip = inversive_product(caps[u], caps[v])
        inc.append(Incidence(u, v, "tangent", math.pi, abs(ip + 1.0)))
    for e, (fa, fb) in enumerate(med.dual_edges()):
        w = math.acos(max(-1.0, min(1.0, inversive_product(caps[fa], caps[fb]))))
        inc.append(Incidence(min(fa, fb), max(fa, fb), "angle", w, abs(w - aug.w[e])))
    cfg = CircleConfig(caps, list(aug.roles), labels, inc, X)
    cfg.info["concyclic_residual"] = float(np.max(resid))
    cfg.info["num_white"] = nw
    return cfg


def vertex_angle_sums(aug: AugmentedData, cfg: CircleConfig) -> np.ndarray:
    """Sum of measured exterior angles on the edges around each augmented vertex."""
    med = aug.surface
    ang = {}
    for e, (fa, fb) in enumerate(med.dual_edges()):
        ang[e] = math.acos(max(-1.0, min(1.0, inversive_product(cfg.caps[fa], cfg.caps[fb]))))
    return np.array([sum(ang[e] for e in med.edges_at_vertex(v)) for v in range(med.num_vertices)])


def triangulation_from_faces(faces: Sequence[Sequence[int]], num_vertices: int | None = None) -> Surface:
    faces = oriented_faces(faces)
    s = Surface.from_faces(faces, num_vertices)
    return s


def check_packable(tri: Surface) -> None:
    if not tri.is_triangulation():
        raise PackingError("input is not a triangulation")
    if not tri.is_sphere():
        raise PackingError("input does not triangulate the sphere")
    for v in range(tri.num_vertices):
        if tri.vertex_degree(v) < 3:
            raise PackingError(f"vertex {v} has degree {tri.vertex_degree(v)} < 3",
                               {"kind": "degree", "vertex": v})
    seen = set()
    for u, v in tri.edge_ends:
        key = frozenset((u, v))
        if u == v or key in seen:
            raise PackingError(f"edge {sorted(key)} is a loop or repeated", {"kind": "multi-edge", "edge": sorted(key)})
        seen.add(key)


def koebe_pack(tri: Surface, apex: int | None = None, opts: SolveOptions | None = None,
               normalize: bool = True, max_len: int = 8) -> CircleConfig:
    check_packable(tri)
    aug = thurston_augment(tri)
    rep = validate_dihedral_data(aug, max_len=max_len)
    if not rep.ok:
        raise PackingError("augmented angle data fails the circuit conditions", rep.as_dict())
    med = aug.surface
    apex = choose_apex(med) if apex is None else apex
    cx, tets, lab, target = ball_from_cellulation(med, aug.w, apex)
    sol = solve_structure(cx, target, opts)
    if not sol.converged:
        cert = sol.degeneration.as_dict() if sol.degeneration else {}
        raise PackingError(f"solver returned {sol.status_label()}", cert)
    dev = develop(cx, sol.assignment)
    X = np.zeros((med.num_vertices, 3))
    for c, lbl in lab.items():
        X[lbl] = to_sphere(dev.positions[c])
    if normalize:
        X = centre_points(X)
    cfg = configuration(aug, X)
    cfg.info.update(
        apex=apex, volume=sol.volume, iterations=sol.iterations, max_shear=sol.max_shear,
        placement_spread=dev.max_spread,
    )
    return cfg


def moved_configuration(aug: AugmentedData, cfg: CircleConfig, m: np.ndarray) -> CircleConfig:
    """Apply a Moebius matrix to the points and rebuild the circles."""
    X = np.array([to_sphere(apply(m, from_sphere(x))) for x in cfg.points])
    return configuration(aug, X)


# ---------------------------------------------------------------- SVG


@dataclass
class SvgView:
    size: int = 600
    extent: float = 3.0  # half-width of the viewport in the stereographic plane
    annotate: bool = False


def planar_circle(cap: Cap):
    """('circle', cx, cy, r, outside) or ('line', nx, ny, d) in the stereographic plane."""
    nx, ny, nz = cap.n
    d = cap.d
    den = nz - d
    if abs(den) < 1e-12:
        return ("line", nx, ny, d)
    cx, cy = -nx / den, -ny / den
    r = math.sqrt(max(0.0, 1 - d * d)) / abs(den)
    return ("circle", cx, cy, r, den > 0)


def _f(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def emit_svg(cfg: CircleConfig, view: SvgView | None = None) -> str:
    view = view or SvgView()
    R = view.extent
    k = view.size / (2 * R)

    def X(x):
        return (x + R) * k

    def Y(y):
        return (R - y) * k

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{view.size}" height="{view.size}" '
        f'viewBox="0 0 {view.size} {view.size}">',
        "<defs>",
        f'<clipPath id="view"><rect x="0" y="0" width="{view.size}" height="{view.size}"/></clipPath>',
        "</defs>",
        "<style>.White{fill:none;stroke:#1f4e9c;stroke-width:1.5}"
        ".Black{fill:none;stroke:#000000;stroke-width:0.8;stroke-dasharray:4 2}</style>",
        f'<rect x="0" y="0" width="{view.size}" height="{view.size}" fill="#ffffff"/>',
    ]
    for idx, (cap, role) in enumerate(zip(cfg.caps, cfg.roles)):
        pc = planar_circle(cap)
        lbl = cfg.labels[idx] if idx < len(cfg.labels) else str(idx)
        if pc[0] == "circle":
            _, cx, cy, r, outside = pc
            extra = ' data-outside="1"' if outside else ""
            out.append(f'<circle class="{role}" id="{lbl}" cx="{_f(X(cx))}" cy="{_f(Y(cy))}" r="{_f(r * k)}"{extra}/>')
        else:
            _, nx, ny, d = pc
            nn = math.hypot(nx, ny)
            px, py = nx * d / nn**2, ny * d / nn**2
            dx, dy = -ny / nn, nx / nn
            L = 4 * R
            out.append(
                f'<line class="{role}" id="{lbl}" x1="{_f(X(px - L * dx))}" y1="{_f(Y(py - L * dy))}" '
                f'x2="{_f(X(px + L * dx))}" y2="{_f(Y(py + L * dy))}" clip-path="url(#view)"/>'
            )
    if view.annotate:
        for inc in cfg.incidences:
            out.append(f"<!-- {cfg.labels[inc.i]} {cfg.labels[inc.j]} {inc.kind} {_f(inc.angle)} -->")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- random polyhedra


@dataclass
class RandomPolyhedron:
    points: np.ndarray
    cellulation: DelaunayCellulation
    exterior: np.ndarray  # exterior angle per cell edge


def polyhedron_exterior_angles(cell: DelaunayCellulation) -> np.ndarray:
    """Exterior dihedral angles of the ideal polyhedron with these vertices."""
    caps = [Cap(tuple(n), float(d)) for n, d in zip(cell.normals, cell.offsets)]
    return np.array([
        math.acos(max(-1.0, min(1.0, inversive_product(caps[a], caps[b]))))
        for a, b in cell.surface.dual_edges()
    ])


def random_polyhedron(n: int, rng: np.random.Generator) -> RandomPolyhedron:
    x = rng.normal(size=(n, 3))
    P = x / np.linalg.norm(x, axis=1, keepdims=True)
    cell = delaunay_on_sphere(P)
    return RandomPolyhedron(P, cell, polyhedron_exterior_angles(cell))
