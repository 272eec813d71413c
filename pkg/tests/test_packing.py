import math
import re
from itertools import combinations

import numpy as np
import pytest

from idealhyp.geom import Cap, from_pair, from_sphere, random_mobius
from idealhyp.fixtures import icosahedron_graph, k4_graph, octahedron_graph, random_sphere_points
from idealhyp.packing import (
    DelaunayError,
    PackingError,
    SvgView,
    ball_from_cellulation,
    brute_force_delaunay_triples,
    check_packable,
    choose_apex,
    cone_ball,
    delaunay_on_sphere,
    emit_svg,
    koebe_pack,
    moved_configuration,
    planar_circle,
    random_polyhedron,
    thurston_augment,
    triangulation_from_faces,
    vertex_angle_sums,
)
from idealhyp.loba import lobachevsky
from idealhyp.solver import solve_structure
from idealhyp.surface import SurfaceError

CUBE = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]) / math.sqrt(3)


def test_cube_gives_six_squares():
    cell = delaunay_on_sphere(CUBE)
    assert cell.surface.num_faces == 6
    assert all(len(f) == 4 for f in cell.surface.faces)
    assert cell.surface.is_sphere()
    assert cell.is_empty_circumdisk()
    # opposite caps of a cube are congruent
    assert np.allclose(cell.offsets, 1 / math.sqrt(3))


def test_octahedron_points():
    P = np.vstack([np.eye(3), -np.eye(3)])
    cell = delaunay_on_sphere(P)
    assert cell.surface.num_faces == 8 and cell.surface.is_triangulation()


def test_delaunay_errors():
    with pytest.raises(DelaunayError, match="at least 4"):
        delaunay_on_sphere(CUBE[:3])
    with pytest.raises(DelaunayError, match="unit"):
        delaunay_on_sphere(CUBE * 2)
    with pytest.raises(DelaunayError, match="distinct"):
        delaunay_on_sphere(np.vstack([CUBE, CUBE[:1]]))
    ring = np.array([[math.cos(t), math.sin(t), 0.0] for t in np.linspace(0, 2 * math.pi, 7)[:-1]])
    with pytest.raises(DelaunayError, match="circle"):
        delaunay_on_sphere(ring)
    with pytest.raises(DelaunayError):
        delaunay_on_sphere(np.zeros((5, 2)))


def test_delaunay_against_brute_force(rng):
    for _ in range(30):
        n = int(rng.integers(4, 25))
        P = random_sphere_points(n, rng)
        cell = delaunay_on_sphere(P)
        ours = {frozenset(c) for f in cell.surface.faces for c in combinations(f, 3)}
        assert ours == brute_force_delaunay_triples(P)
        assert np.all(cell.margins() > -1e-12)
        assert cell.surface.euler_characteristic() == 2


def test_augment_counts():
    cases = [(k4_graph(), 6, 4, 4), (octahedron_graph(), 12, 6, 8), (icosahedron_graph(), 30, 12, 20)]
    for g, nv, nw, nb in cases:
        aug = thurston_augment(triangulation_from_faces(g))
        assert aug.surface.num_vertices == nv
        assert aug.roles.count("White") == nw and aug.roles.count("Black") == nb
        assert all(aug.surface.vertex_degree(v) == 4 for v in range(nv))
        assert np.allclose(aug.w, math.pi / 2)


def test_augment_rejects_polygons():
    cube = delaunay_on_sphere(CUBE).surface
    with pytest.raises(SurfaceError):
        thurston_augment(cube)


def test_cone_ball_adds_flat_diagonals():
    cube = delaunay_on_sphere(CUBE).surface
    apex = choose_apex(cube)
    tets, diags = cone_ball(cube, apex)
    # three faces miss the apex and give two tets each; every face gets one diagonal
    assert len(tets) == 6 and len(diags) == 6
    w = np.full(cube.num_edges, 2 * math.pi / 3)
    cx, _, _, t = ball_from_cellulation(cube, w, apex)
    assert cx.is_ball()
    assert len(t.flat) == 6
    assert np.allclose(t.values[sorted(t.flat)], math.pi)
    # regular ideal cube
    sol = solve_structure(cx, t)
    assert sol.converged
    assert sol.volume == pytest.approx(10 * lobachevsky(math.pi / 6), abs=1e-10)
    assert sol.volume == pytest.approx(5.0747080320482, abs=1e-12)


def test_check_packable():
    with pytest.raises(PackingError) as err:
        check_packable(triangulation_from_faces([(0, 1, 2), (0, 2, 1)]))
    assert err.value.certificate["kind"] == "degree"
    check_packable(triangulation_from_faces(octahedron_graph()))


def test_koebe_k4_symmetric():
    cfg = koebe_pack(triangulation_from_faces(k4_graph()))
    white = cfg.white()
    assert len(white) == 4 and len(cfg.black()) == 4
    assert cfg.max_tangency_residual() < 1e-10
    radii = [cfg.caps[w].angular_radius for w in white]
    assert max(radii) - min(radii) < 1e-9
    # white circles have disjoint interiors: pairwise angular distance >= sum of radii
    for a, b in combinations(white, 2):
        ang = math.acos(np.clip(cfg.caps[a].normal @ cfg.caps[b].normal, -1, 1))
        assert ang >= radii[0] + radii[1] - 1e-9
    assert np.linalg.norm(cfg.points.mean(axis=0)) < 1e-9


@pytest.mark.parametrize("graph", [octahedron_graph, icosahedron_graph])
def test_koebe_packings(graph):
    tri = triangulation_from_faces(graph())
    aug = thurston_augment(tri)
    cfg = koebe_pack(tri)
    assert cfg.max_tangency_residual() < 1e-8
    assert cfg.max_angle_residual() < 1e-8
    assert np.allclose(vertex_angle_sums(aug, cfg), 2 * math.pi, atol=1e-8)
    assert cfg.info["concyclic_residual"] < 1e-9


def test_mobius_invariance(rng):
    tri = triangulation_from_faces(octahedron_graph())
    aug = thurston_augment(tri)
    cfg = koebe_pack(tri)
    moved = moved_configuration(aug, cfg, random_mobius(rng))
    assert moved.max_tangency_residual() < 1e-7
    assert moved.max_angle_residual() < 1e-7


def test_planar_circle_matches_projection(rng):
    for _ in range(20):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        cap = Cap(tuple(n), float(rng.uniform(-0.9, 0.9)))
        kind, cx, cy, r, _ = planar_circle(cap)
        assert kind == "circle"
        # sample the boundary circle on S^2 and project
        u = np.cross(n, [1.0, 0, 0])
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        rho = math.sqrt(1 - cap.d**2)
        for t in np.linspace(0, 2 * math.pi, 7):
            x = cap.d * n + rho * (math.cos(t) * u + math.sin(t) * v)
            z = from_pair(from_sphere(x))
            assert abs(abs(z - complex(cx, cy)) - r) < 1e-8 * max(1.0, r)


def test_planar_line():
    kind, nx, ny, d = planar_circle(Cap((1.0, 0.0, 0.0), 0.0))
    assert kind == "line" and d == 0.0


def test_svg_deterministic_and_complete():
    cfg = koebe_pack(triangulation_from_faces(octahedron_graph()))
    a = emit_svg(cfg)
    b = emit_svg(koebe_pack(triangulation_from_faces(octahedron_graph())))
    assert a == b
    n_shapes = len(re.findall(r"<circle |<line ", a))
    assert n_shapes == len(cfg.caps) == 14
    assert a.count('class="White"') == 6 and a.count('class="Black"') == 8
    assert re.search(r"\d\.\d{7}", a) is None
    ann = emit_svg(cfg, SvgView(annotate=True))
    assert ann.count("<!--") == len(cfg.incidences)


def test_svg_line_for_circle_through_infinity():
    cfg = koebe_pack(triangulation_from_faces(k4_graph()))
    # rotate so the north pole is a tangency point: circles through it become lines
    from idealhyp.packing import configuration

    aug = thurston_augment(triangulation_from_faces(k4_graph()))
    X = cfg.points
    p = X[0]
    axis = np.cross(p, [0, 0, 1.0])
    s, c = np.linalg.norm(axis), p[2]
    k = axis / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    Rm = np.eye(3) + s * K + (1 - c) * K @ K
    rot = configuration(aug, X @ Rm.T)
    svg = emit_svg(rot)
    assert svg.count("<line ") >= 2
    assert 'clip-path="url(#view)"' in svg


def test_random_polyhedron_angles(rng):
    for _ in range(10):
        poly = random_polyhedron(int(rng.integers(4, 20)), rng)
        w = poly.exterior
        s = poly.cellulation.surface
        assert np.all((w > 0) & (w < math.pi))
        sums = [sum(w[e] for e in s.edges_at_vertex(v)) for v in range(s.num_vertices)]
        assert np.allclose(sums, 2 * math.pi, atol=1e-9)
