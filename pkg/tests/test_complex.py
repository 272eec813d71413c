from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idealhyp.complex import (
    EDGE_PAIR,
    EDGES,
    FACE_VERTS,
    ComplexValidationError,
    GluingData,
    build_complex,
    complex_from_tets,
    euler_check,
    odd_permutations,
    perm_inverse,
    perm_sign,
)
from idealhyp.fixtures import bipyramid, cone_octahedron, orient_tets, single_tet, solid_torus
from idealhyp.packing import ball_from_cellulation, choose_apex, random_polyhedron
from idealhyp.surface import Surface, SurfaceError, enumerate_circuits, oriented_faces


def test_conventions():
    # opposite edges share an angle pair
    for s, (i, j) in enumerate(EDGES):
        opp = tuple(x for x in range(4) if x not in (i, j))
        assert EDGE_PAIR[EDGES.index(opp)] == EDGE_PAIR[s]
    # faces are listed outward-oriented: each edge appears once in each direction
    directed = [(f[q], f[(q + 1) % 3]) for f in FACE_VERTS for q in range(3)]
    assert len(set(directed)) == 12
    assert all((v, u) in directed for u, v in directed)
    assert len(odd_permutations()) == 12


@given(st.permutations(range(4)))
def test_perm_helpers(p):
    q = perm_inverse(p)
    assert [p[q[i]] for i in range(4)] == [0, 1, 2, 3]
    assert perm_sign(q) == perm_sign(p)


@pytest.mark.parametrize(
    "make, counts",
    [
        (single_tet, {"f": 1, "e_i": 0, "e_b": 6, "v": 4}),
        (bipyramid, {"f": 2, "e_i": 0, "e_b": 9, "v": 5}),
        (cone_octahedron, {"f": 4, "e_i": 1, "e_b": 12, "v": 6}),
        (solid_torus, {"f": 1, "e_i": 0, "e_b": 3, "v": 1}),
    ],
)
def test_counts_and_euler(make, counts):
    cx = make()
    assert cx.counts() == counts
    assert euler_check(cx)


def test_solid_torus_boundary():
    cx = solid_torus()
    assert cx.boundary.euler_characteristic() == 0
    assert not cx.is_ball()
    assert cx.boundary.num_faces == 2


def test_cone_octahedron_interior_edge():
    cx = cone_octahedron()
    (e,) = cx.interior_edges
    assert cx.edge_classes[e].valence == 4
    assert cx.is_ball()


def test_euler_on_random_coned_polyhedra(rng):
    for _ in range(20):
        poly = random_polyhedron(int(rng.integers(4, 14)), rng)
        s = poly.cellulation.surface
        cx, *_ = ball_from_cellulation(s, poly.exterior, choose_apex(s))
        assert euler_check(cx)
        assert cx.is_ball()


def test_euler_check_rejects_wrong_counts():
    assert not euler_check(single_tet(), {"f": 1, "e_i": 0, "e_b": 6, "v": 3})


def test_gluing_errors():
    with pytest.raises(ComplexValidationError, match="involutive"):
        build_complex(GluingData(2, [[(1, 0, (0, 2, 1, 3)), None, None, None], [None] * 4]))
    with pytest.raises(ComplexValidationError, match="orientation"):
        build_complex(GluingData(2, [[(1, 0, (0, 1, 2, 3)), None, None, None],
                                     [(0, 0, (0, 1, 2, 3)), None, None, None]]))
    with pytest.raises(ComplexValidationError, match="itself"):
        build_complex(GluingData(1, [[(0, 0, (0, 2, 1, 3)), None, None, None]]))
    with pytest.raises(ComplexValidationError, match="face to face"):
        build_complex(GluingData(2, [[(1, 1, (0, 2, 1, 3)), None, None, None],
                                     [None, (0, 0, (0, 2, 1, 3)), None, None]]))
    with pytest.raises(ComplexValidationError) as err:
        build_complex(GluingData(1, [[None] * 3]))
    assert err.value.tet == 0


def test_complex_from_tets_errors():
    with pytest.raises(ComplexValidationError, match="repeated"):
        complex_from_tets([(0, 1, 1, 2)])
    with pytest.raises(ComplexValidationError, match="more than two"):
        complex_from_tets([(0, 1, 2, 3), (0, 1, 2, 4), (0, 1, 2, 5)])


def test_closed_vertex_link_rejected():
    # the boundary of a 4-simplex gives a closed link at every vertex
    tets = [tuple(x for x in range(5) if x != k) for k in range(5)]
    with pytest.raises(ComplexValidationError):
        build_complex(complex_from_tets(orient_tets(tets)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_every_odd_self_gluing_is_classified(seed):
    # glue two tets along one face with a random odd permutation: always a ball
    rng = np.random.default_rng(seed)
    f, f2 = int(rng.integers(4)), int(rng.integers(4))
    ps = [p for p in permutations(range(4)) if p[f] == f2 and perm_sign(p) == -1]
    p = ps[int(rng.integers(len(ps)))]
    g = [[None] * 4, [None] * 4]
    g[0][f] = (1, f2, p)
    g[1][f2] = (0, f, perm_inverse(p))
    cx = build_complex(GluingData(2, g))
    assert cx.counts() == {"f": 2, "e_i": 0, "e_b": 9, "v": 5}
    assert cx.is_ball() and euler_check(cx)


# ---------------------------------------------------------------- surfaces


def cube_faces():
    return [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)]


def test_surface_from_faces_counts():
    s = Surface.from_faces(cube_faces())
    assert (s.num_vertices, s.num_edges, s.num_faces) == (8, 12, 6)
    assert s.is_sphere() and not s.is_triangulation()
    for v in range(8):
        es, fs = s.vertex_rotation(v)
        assert len(es) == len(fs) == 3


def test_surface_inconsistent_edge():
    with pytest.raises(SurfaceError):
        Surface.from_faces([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def test_oriented_faces_fixes_orientation():
    raw = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    s = Surface.from_faces(oriented_faces(raw))
    assert s.is_sphere()


def test_oriented_faces_rejects_nonmanifold():
    with pytest.raises(SurfaceError):
        oriented_faces([(0, 1, 2), (0, 1, 3), (0, 1, 4)])


def test_cube_circuits():
    s = Surface.from_faces(cube_faces())
    circuits, complete = enumerate_circuits(s, 12)
    elem = [c for c in circuits if c.elementary]
    non = [c for c in circuits if not c.elementary]
    assert complete
    assert len(elem) == 8 and all(len(c) == 3 for c in elem)
    # dual octahedron: 4-cycles not bounding a face are the 3 equators
    assert sorted(len(c) for c in non)[:3] == [4, 4, 4]
    assert all(c.contractible == "known" for c in non)


def test_torus_circuits_unknown_unless_declared():
    s = solid_torus().boundary
    circuits, _ = enumerate_circuits(s, 6)
    non = [c for c in circuits if not c.elementary]
    assert non and all(c.contractible == "unknown" for c in non)
    decl = [non[0].edges]
    circuits, _ = enumerate_circuits(s, 6, decl)
    assert any(c.contractible == "declared" for c in circuits)


def test_max_len_must_be_positive():
    with pytest.raises(ValueError):
        enumerate_circuits(Surface.from_faces(cube_faces()), 0)
