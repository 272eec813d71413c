import math

import numpy as np
import pytest
from scipy.linalg import null_space

from idealhyp.angles import AngleAssignment, AngleTarget, edge_angle_totals
from idealhyp.fixtures import (
    bipyramid,
    cone_octahedron,
    degenerate_target,
    regular_target,
    right_angled_target,
    single_tet,
)
from idealhyp.loba import REGULAR_VOLUME, lobachevsky
from idealhyp.packing import ball_from_cellulation, choose_apex, random_polyhedron
from idealhyp.solver import (
    InfeasibleError,
    SolveOptions,
    TargetError,
    constraint_system,
    feasible_start,
    interior_shear_residuals,
    projected_gradient,
    random_feasible_point,
    solve_structure,
    total_volume,
)

OCTA_VOLUME = 8 * 0.4579827970886095


def random_problem(rng, lo=5, hi=10):
    poly = random_polyhedron(int(rng.integers(lo, hi)), rng)
    s = poly.cellulation.surface
    cx, _, _, t = ball_from_cellulation(s, poly.exterior, choose_apex(s))
    return cx, t, poly


def test_single_tet_volume():
    cx = single_tet()
    sol = solve_structure(cx, regular_target(cx))
    assert sol.converged
    assert sol.volume == pytest.approx(REGULAR_VOLUME, abs=1e-12)


def test_octahedron_volume_and_shear():
    cx = cone_octahedron()
    sol = solve_structure(cx, right_angled_target(cx))
    assert sol.converged and sol.status_label() == "Converged"
    assert abs(sol.volume - OCTA_VOLUME) < 1e-12
    assert sol.max_shear < 1e-12
    assert np.allclose(np.sort(sol.assignment.angles, axis=1), [[math.pi / 4, math.pi / 4, math.pi / 2]] * 4, atol=1e-9)


def test_bipyramid_volume(rng):
    # two tets with the same boundary angle data at the shared face
    cx = bipyramid()
    vals = {e: math.pi / 3 for e in cx.boundary_edges}
    t = AngleTarget.from_boundary(cx, vals)
    # the three edges of the glued face carry 2 pi / 3
    for ec in cx.edge_classes:
        if ec.valence == 2:
            t.values[ec.index] = 2 * math.pi / 3
    sol = solve_structure(cx, t)
    assert sol.converged
    assert sol.volume == pytest.approx(2 * REGULAR_VOLUME, abs=1e-12)


def test_solution_satisfies_constraints(rng):
    for _ in range(5):
        cx, t, _ = random_problem(rng)
        sol = solve_structure(cx, t)
        assert sol.converged
        A, b = constraint_system(cx, t)
        assert np.max(np.abs(A @ sol.assignment.flat - b)) < 1e-9
        assert np.allclose(edge_angle_totals(cx, sol.assignment), t.values, atol=1e-9)


def test_volumes_monotone(rng):
    cx, t, _ = random_problem(rng, 8, 12)
    start = random_feasible_point(cx, t, rng)
    sol = solve_structure(cx, t, SolveOptions(dump_iterates=True), start=start)
    v = np.array(sol.volumes)
    assert np.all(np.diff(v) >= -1e-13)
    assert len(sol.iterates) == len(v)
    assert sol.volume == pytest.approx(total_volume(cx, sol.assignment))


def test_projected_gradient_by_finite_differences(rng):
    cx, t, _ = random_problem(rng)
    a = feasible_start(cx, t)
    Z = null_space(constraint_system(cx, t)[0])
    g = projected_gradient(cx, t, a, Z)
    h = 1e-6
    x = a.flat
    fd = np.array([(np.sum(lobachevsky(x + h * z)) - np.sum(lobachevsky(x - h * z))) / (2 * h) for z in Z.T])
    assert np.allclose(fd, g, atol=1e-7)


def test_random_starts_agree(rng):
    cx, t, _ = random_problem(rng)
    ref = solve_structure(cx, t)
    for _ in range(20):
        sol = solve_structure(cx, t, start=random_feasible_point(cx, t, rng))
        assert sol.converged
        assert np.max(np.abs(sol.assignment.flat - ref.assignment.flat)) < 1e-6


def test_converged_iff_conditions(rng):
    for _ in range(10):
        cx, t, _ = random_problem(rng)
        for iters in (0, 1, 2, 200):
            opts = SolveOptions(max_iters=iters)
            sol = solve_structure(cx, t, opts)
            both = sol.gradient_norm <= opts.grad_tol and sol.max_shear <= opts.shear_tol
            assert sol.converged == both
            if not sol.converged:
                assert sol.status in ("IterLimit", "Degenerate")


def test_critical_point_has_zero_shear(rng):
    # at the volume maximum the interior shears vanish
    cx, t, _ = random_problem(rng, 10, 14)
    sol = solve_structure(cx, t)
    assert np.max(np.abs(interior_shear_residuals(cx, sol.assignment)), initial=0) < 1e-8


def test_farkas_certificate():
    cx = single_tet()
    t = regular_target(cx)
    t.values[0] = 1.0
    t.values[5] = 1.1  # opposite edges share one angle
    with pytest.raises(TargetError):
        solve_structure(cx, t)
    with pytest.raises(InfeasibleError) as err:
        solve_structure(cx, t, validate=False)
    cert = err.value.certificate
    assert cert["kind"] == "farkas"
    A, b = constraint_system(cx, t)
    names = [f"tet {i}" for i in range(cx.num_tets)] + [f"edge {e}" for e in range(len(cx.edge_classes))]
    y = np.zeros(len(b))
    for row, w in zip(cert["rows"], cert["weights"]):
        y[names.index(row)] = w
    assert np.linalg.norm(A.T @ y) < 1e-9
    assert abs(y @ b) > 1e-3
    assert cert["combination"] == pytest.approx(y @ b)


def test_infeasible_nonnegative():
    cx = single_tet()
    t = regular_target(cx)
    for e, v in ((0, 2.0), (5, 2.0), (1, 1.5), (4, 1.5), (2, math.pi - 3.5), (3, math.pi - 3.5)):
        t.values[e] = v
    with pytest.raises(InfeasibleError):
        solve_structure(cx, t, validate=False)


def test_degenerate_fixture_classification():
    cx, t = degenerate_target()
    sol = solve_structure(cx, t)
    assert sol.status == "Degenerate"
    d = sol.degeneration
    assert d.reason == "c"
    assert abs(d.circuit_sum - 2 * math.pi) < 1e-6
    assert not d.circuit.elementary
    assert sol.status_label() == "Degenerate(c)"
    assert "circuit_edges" in d.as_dict()


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(grad_tol=0)
    with pytest.raises(ValueError):
        SolveOptions(max_iters=-1)


def test_bad_start_rejected():
    cx = cone_octahedron()
    with pytest.raises(ValueError):
        solve_structure(cx, right_angled_target(cx), start=AngleAssignment(np.full((4, 3), math.pi / 3)))
