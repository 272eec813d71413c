"""Upper half-space oracle: shapes, shears, horosphere lengths, developing.

Ideal points are stored as homogeneous pairs (z0, z1) ~ z0 / z1, so that the
point at infinity is (1, 0) and Moebius maps are 2x2 complex matrices.

Placement convention: tet vertices (v0, v1, v2, v3) go to (0, 1, inf, z) with
z the shape parameter of the edge v0 v2 (angle pair 1).  For an edge (i, j)
completed to an even permutation (i, j, k, l), the shape parameter at that
edge is the image of l under the map sending i, j, k to inf, 0, 1.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .angles import AngleAssignment
from .complex import EDGE_INDEX, EDGE_PAIR, EDGES, IdealComplex, perm_sign
from .loba import AngleDomainError, TetAngles

PLACEMENT_TOL = 1e-7
INF = complex("inf")


class UnsupportedTopologyError(ValueError):
    pass


class CertificationError(ValueError):
    pass


# ---------------------------------------------------------------- points


def as_pair(z) -> np.ndarray:
    if isinstance(z, np.ndarray) and z.shape == (2,):
        return z.astype(complex)
    z = complex(z)
    if math.isinf(z.real) or math.isinf(z.imag):
        return np.array([1.0 + 0j, 0j])
    return np.array([z, 1.0 + 0j])


def normalize_pair(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    return p / p[int(np.argmax(np.abs(p)))]


def from_pair(p: np.ndarray) -> complex:
    if abs(p[1]) <= 1e-300 or abs(p[1]) < 1e-15 * abs(p[0]):
        return INF
    return complex(p[0] / p[1])


def pair_det(p: np.ndarray, q: np.ndarray) -> complex:
    return p[0] * q[1] - p[1] * q[0]


def chordal(p, q) -> float:
    """Chordal distance on the Riemann sphere (diameter 2)."""
    p, q = as_pair(p), as_pair(q)
    return float(2 * abs(pair_det(p, q)) / (np.linalg.norm(p) * np.linalg.norm(q)))


def to_sphere(p) -> np.ndarray:
    """Inverse stereographic projection; infinity goes to (0, 0, 1)."""
    p = as_pair(p)
    w = p[0] * np.conj(p[1])
    n = abs(p[0]) ** 2 + abs(p[1]) ** 2
    return np.array([2 * w.real, 2 * w.imag, abs(p[0]) ** 2 - abs(p[1]) ** 2]) / n


def from_sphere(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    if x[2] > 0:
        return normalize_pair(np.array([1 + x[2], complex(x[0], -x[1])]))
    return normalize_pair(np.array([complex(x[0], x[1]), 1 - x[2]]))


# ---------------------------------------------------------------- Moebius


def mobius_to_standard(a, b, c) -> np.ndarray:
    """Matrix sending a, b, c to inf, 0, 1."""
    a, b, c = as_pair(a), as_pair(b), as_pair(c)
    num = pair_det(c, a) * np.array([b[1], -b[0]])
    den = pair_det(c, b) * np.array([a[1], -a[0]])
    m = np.array([num, den])
    return m / np.sqrt(np.linalg.det(m))


def apply(m: np.ndarray, p) -> np.ndarray:
    return normalize_pair(m @ as_pair(p))


def cross_ratio(a, b, c, d) -> complex:
    """Image of d under the map sending a, b, c to inf, 0, 1."""
    return from_pair(apply(mobius_to_standard(a, b, c), d))


def random_mobius(rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return m / np.sqrt(np.linalg.det(m))


def mobius_equivalent(xs, ys, tol: float = 1e-6) -> bool:
    """Whether labelled point lists agree up to a Moebius map."""
    xs = [as_pair(x) for x in xs]
    ys = [as_pair(y) for y in ys]
    if len(xs) != len(ys):
        return False
    if len(xs) <= 3:
        return True
    mx = mobius_to_standard(*xs[:3])
    my = mobius_to_standard(*ys[:3])
    return all(chordal(apply(mx, x), apply(my, y)) <= tol for x, y in zip(xs[3:], ys[3:]))


def mobius_equivalent_sets(xs, ys, tol: float = 1e-6) -> bool:
    """Whether the unlabelled point set xs is a Moebius image of ys."""
    xs = [as_pair(x) for x in xs]
    ys = [as_pair(y) for y in ys]
    if len(xs) != len(ys):
        return False
    if len(xs) <= 3:
        return True
    mx = mobius_to_standard(*xs[:3])
    imgs = [apply(mx, x) for x in xs[3:]]
    for i, j, k in permutations(range(len(ys)), 3):
        my = mobius_to_standard(ys[i], ys[j], ys[k])
        rest = [apply(my, ys[q]) for q in range(len(ys)) if q not in (i, j, k)]
        used = [False] * len(rest)
        ok = True
        for p in imgs:
            hit = next((q for q, r in enumerate(rest) if not used[q] and chordal(p, r) <= tol), None)
            if hit is None:
                ok = False
                break
            used[hit] = True
        if ok:
            return True
    return False


# ---------------------------------------------------------------- shapes


@dataclass(frozen=True)
class ShapeParam:
    z: complex

    def __post_init__(self):
        if not (self.z.imag > 0 and math.isfinite(self.z.real) and math.isfinite(self.z.imag)):
            raise AngleDomainError(f"shape parameter needs Im z > 0, got {self.z!r}")


def _rotated(a: TetAngles, edge: int) -> tuple[float, float, float]:
    k = EDGE_PAIR[edge]
    return a[k], a[(k + 1) % 3], a[(k + 2) % 3]


def shape_from_angles(a: TetAngles, edge: int) -> ShapeParam:
    """z = (sin beta / sin gamma) e^{i alpha}, alpha at the edge, beta, gamma the next pairs."""
    al, be, ga = _rotated(a, edge)
    return ShapeParam(math.sin(be) / math.sin(ga) * complex(math.cos(al), math.sin(al)))


def angles_from_shape(z: ShapeParam, edge: int) -> TetAngles:
    """Inverse of shape_from_angles: args of z, 1/(1-z), 1 - 1/z."""
    w = z.z
    al = math.atan2(w.imag, w.real)
    be = math.atan2(*(lambda u: (u.imag, u.real))(1 / (1 - w)))
    vals = [0.0, 0.0, 0.0]
    k = EDGE_PAIR[edge]
    vals[k] = al
    vals[(k + 1) % 3] = be
    vals[(k + 2) % 3] = math.pi - al - be
    return TetAngles.from_two(vals[0], vals[1])


def shear_at_edge(a: TetAngles, edge: int) -> float:
    """log(sin beta / sin gamma) = log|z|.

    The edge (i, j) is sent to (inf, 0); the feet of the perpendiculars from
    the two other vertices sit at heights 1 and |z|, so this is the signed
    distance from the foot of k to the foot of l, (i, j, k, l) even.
    It is the same for both orientations of the edge and for opposite edges.
    """
    _, be, ga = _rotated(a, edge)
    return math.log(math.sin(be) / math.sin(ga))


def place_tet(a: TetAngles) -> list[np.ndarray]:
    """Vertex positions (0, 1, inf, z) of a positively oriented tet."""
    z = shape_from_angles(a, EDGE_INDEX[(0, 2)]).z
    return [as_pair(0), as_pair(1), as_pair(INF), as_pair(z)]


def even_completion(i: int, j: int) -> tuple[int, int, int, int]:
    k, l = [x for x in range(4) if x not in (i, j)]
    return (i, j, k, l) if perm_sign((i, j, k, l)) == 1 else (i, j, l, k)


def measured_angles(pos) -> np.ndarray:
    """Dihedral angles of the tet with the given vertex positions, per edge slot.

    The angle at edge (i, j) is read from the Euclidean triangle seen from
    vertex i sent to infinity: the link triangle's angle at the image of j.
    """
    out = np.zeros(6)
    for s, (i, j) in enumerate(EDGES):
        _, _, k, l = even_completion(i, j)
        z = cross_ratio(pos[i], pos[j], pos[k], pos[l])
        out[s] = abs(math.atan2(z.imag, z.real))
    return out


def tet_orientation(pos) -> float:
    """Im of the shape at edge 02; positive for positively oriented tets."""
    return cross_ratio(pos[2], pos[0], pos[1], pos[3]).imag


# ---------------------------------------------------------------- horospheres


@dataclass(frozen=True)
class HoroChoice:
    """Per placed vertex: diameter at a finite point, height at infinity."""

    sizes: tuple[float, ...]

    def __post_init__(self):
        if not all(s > 0 and math.isfinite(s) for s in self.sizes):
            raise ValueError("horosphere decorations must be positive")


def horo_distance(p, q, sp: float, sq: float) -> float:
    """Signed distance between horospheres at ideal points p, q.

    ``sp``/``sq`` are diameters at finite points and heights at infinity.
    """
    p, q = as_pair(p), as_pair(q)
    pinf, qinf = abs(p[1]) == 0, abs(q[1]) == 0
    if pinf and qinf:
        raise ValueError("horospheres at the same ideal point")
    if pinf:
        return math.log(sp / sq)
    if qinf:
        return math.log(sq / sp)
    d = abs(p[0] / p[1] - q[0] / q[1])
    return math.log(d * d / (sp * sq))


def truncated_edge_length(z: ShapeParam, edge: int, h: HoroChoice) -> float:
    """Length of ``edge`` of the tet placed at (0, 1, inf, z)."""
    pos = [0, 1, INF, z.z]
    i, j = EDGES[edge]
    return horo_distance(pos[i], pos[j], h.sizes[i], h.sizes[j])


def tet_lengths(pos, sizes) -> np.ndarray:
    return np.array([horo_distance(pos[i], pos[j], sizes[i], sizes[j]) for i, j in EDGES])


# ---------------------------------------------------------------- circles


@dataclass(frozen=True)
class Cap:
    """Spherical cap {x : n . x >= d} on the unit sphere; its boundary is a circle."""

    n: tuple[float, float, float]
    d: float

    @property
    def normal(self) -> np.ndarray:
        return np.array(self.n)

    @property
    def angular_radius(self) -> float:
        return math.acos(max(-1.0, min(1.0, self.d)))

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return float(self.normal @ x) > self.d + tol

    def flipped(self) -> "Cap":
        return Cap(tuple(-np.array(self.n)), -self.d)


def cap_through(points_sphere: np.ndarray) -> Cap:
    """Plane through the first three points, as a cap (orientation arbitrary)."""
    p = np.asarray(points_sphere, dtype=float)
    nrm = np.cross(p[1] - p[0], p[2] - p[0])
    nrm /= np.linalg.norm(nrm)
    return Cap(tuple(nrm), float(nrm @ p[0]))


def inversive_product(c1: Cap, c2: Cap) -> float:
    """Cosine of the exterior intersection angle of two caps; -1 for tangency
    with disjoint interiors."""
    r1 = math.sqrt(max(0.0, 1 - c1.d**2))
    r2 = math.sqrt(max(0.0, 1 - c2.d**2))
    return float((c1.normal @ c2.normal - c1.d * c2.d) / (r1 * r2))


# ---------------------------------------------------------------- developing


@dataclass
class DevelopedComplex:
    positions: list[np.ndarray]  # per vertex class, homogeneous pair
    face_caps: list[Cap]  # per boundary face; cap contains no other vertex
    face_residuals: np.ndarray  # concyclicity defect per boundary face
    dihedral: np.ndarray  # realized interior dihedral angle per boundary surface edge
    tet_positions: list[list[np.ndarray]]
    max_spread: float
    cx: IdealComplex

    def points(self) -> list[complex]:
        return [from_pair(p) for p in self.positions]

    def sphere_points(self) -> np.ndarray:
        return np.array([to_sphere(p) for p in self.positions])


def _face_caps(cx: IdealComplex, positions) -> tuple[list[Cap], np.ndarray]:
    sph = np.array([to_sphere(p) for p in positions])
    caps, resid = [], []
    for verts in cx.boundary.faces:
        cap = cap_through(sph[list(verts)])
        others = [v for v in range(len(positions)) if v not in verts]
        if others and np.mean([cap.normal @ sph[v] - cap.d for v in others]) > 0:
            cap = cap.flipped()
        caps.append(cap)
        resid.append(max(abs(cap.normal @ sph[v] - cap.d) for v in verts))
    return caps, np.array(resid)


def boundary_dihedral(cx: IdealComplex, positions) -> np.ndarray:
    """Interior dihedral angle at each boundary surface edge from positions."""
    s = cx.boundary
    out = np.zeros(s.num_edges)
    for e, ((f1, s1), (f2, _)) in enumerate(s.edge_sides):
        u, v = s.edge_ends[e]
        c1 = [x for x in s.faces[f1] if x not in (u, v)][0]
        c2 = [x for x in s.faces[f2] if x not in (u, v)][0]
        w = cross_ratio(positions[u], positions[v], positions[c1], positions[c2])
        out[e] = abs(math.atan2(w.imag, w.real))
    return out


def develop(cx: IdealComplex, a: AngleAssignment, base: int = 0, tol: float = PLACEMENT_TOL) -> DevelopedComplex:
    """Place the base tet at (0, 1, inf, z) and propagate across interior faces."""
    if not cx.is_ball():
        raise UnsupportedTopologyError("developing requires a ball (boundary must be one sphere)")
    n = cx.num_tets
    if not (0 <= base < n):
        raise ValueError("base tet out of range")
    tet_pos: list[list[np.ndarray] | None] = [None] * n
    tet_pos[base] = place_tet(a.tet(base))
    queue = deque([base])
    while queue:
        t = queue.popleft()
        for f, gl in enumerate(cx.gluing.gluings[t]):
            if gl is None:
                continue
            t2, f2, p = gl
            if tet_pos[t2] is not None:
                continue
            pos2: list[np.ndarray | None] = [None] * 4
            for v in range(4):
                if v != f:
                    pos2[p[v]] = tet_pos[t][v]
            known = [v for v in range(4) if v != f2]
            i, j, k, l = even_completion(known[0], known[1])
            if l != f2:
                i, j = j, i
                i, j, k, l = even_completion(i, j)
            z = shape_from_angles(a.tet(t2), EDGE_INDEX[(i, j)]).z
            m = mobius_to_standard(pos2[i], pos2[j], pos2[k])
            pos2[l] = normalize_pair(np.linalg.solve(m, as_pair(z)))
            tet_pos[t2] = pos2  # type: ignore[assignment]
            queue.append(t2)
    if any(tp is None for tp in tet_pos):
        raise UnsupportedTopologyError("complex is not connected")

    positions: list[np.ndarray | None] = [None] * cx.num_vertices
    spread = 0.0
    for t in range(n):
        for v in range(4):
            c = int(cx.vertex_of_slot[t, v])
            if positions[c] is None:
                positions[c] = tet_pos[t][v]
            else:
                spread = max(spread, chordal(positions[c], tet_pos[t][v]))
    if spread > tol:
        raise CertificationError(f"vertex placements disagree by {spread:.3e} (structure not smooth)")
    for t in range(n):
        if tet_orientation(tet_pos[t]) <= 0:
            raise CertificationError(f"tet {t} developed with reversed orientation")
    caps, resid = _face_caps(cx, positions)
    return DevelopedComplex(
        positions,  # type: ignore[arg-type]
        caps,
        resid,
        boundary_dihedral(cx, positions),
        tet_pos,  # type: ignore[arg-type]
        spread,
        cx,
    )


def cross_ratio_table(points) -> np.ndarray:
    """Cross ratios of all ordered 4-tuples drawn in index order (i<j<k<l)."""
    pts = [as_pair(p) for p in points]
    out = []
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                for l in range(k + 1, n):
                    out.append(to_sphere(apply(mobius_to_standard(pts[i], pts[j], pts[k]), pts[l])))
    return np.array(out)


# ---------------------------------------------------------------- Schlafli


@dataclass
class SchlafliSample:
    angles: tuple[float, float, float]
    direction: tuple[float, float, float]
    finite_difference: float
    formula: float
    rel_error: float


def schlafli_sample(a: TetAngles, d: np.ndarray, sizes, h: float = 1e-5) -> SchlafliSample:
    """Central difference of the volume against -1/2 sum L_e d theta_e.

    The tet is placed at (0, 1, inf, z) with the horosphere sizes held fixed.
    The relative error is taken against max(|formula|, 1e-3 |d|) so that
    directions with nearly zero volume change do not divide by zero.
    """
    from .loba import lobachevsky

    x = a.as_array()
    vp = float(np.sum(lobachevsky(x + h * d)))
    vm = float(np.sum(lobachevsky(x - h * d)))
    fd = (vp - vm) / (2 * h)
    L = tet_lengths(place_tet(a), sizes)
    dtheta = np.array([d[EDGE_PAIR[s]] for s in range(6)])
    formula = -0.5 * float(L @ dtheta)
    rel = abs(fd - formula) / max(abs(formula), 1e-3 * float(np.linalg.norm(d)))
    return SchlafliSample(tuple(x), tuple(d), fd, formula, rel)


def random_tet(rng: np.random.Generator, margin: float = 0.05) -> TetAngles:
    while True:
        x = rng.dirichlet([2.0, 2.0, 2.0]) * math.pi
        if x.min() > margin:
            return TetAngles.from_two(float(x[0]), float(x[1]))


def schlafli_check(samples: int, seed: int = 0, h: float = 1e-5) -> list[SchlafliSample]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(samples):
        a = random_tet(rng)
        d = rng.normal(size=3)
        d -= d.mean()
        d /= np.linalg.norm(d)
        sizes = np.exp(rng.uniform(-1.0, 1.0, size=4))
        out.append(schlafli_sample(a, d, sizes, h))
    return out
