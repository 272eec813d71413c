"""Volume maximization on ideal polyhedra with random vertices.

For each sample the hull of n random points on S^2 is coned from a vertex,
the exterior angles of the hull are used as targets, and the maximizer is
compared with the hull itself: developed vertices up to Moebius maps, and
Schlafli lengths against horosphere lengths.
"""
import argparse
import time

import numpy as np

from idealhyp.boundary import developed_lengths, lengths_from_schlafli
from idealhyp.geom import INF, develop, from_pair, from_sphere, mobius_equivalent
from idealhyp.packing import ball_from_cellulation, choose_apex, random_polyhedron
from idealhyp.solver import solve_structure


def run_one(n, rng):
    poly = random_polyhedron(n, rng)
    s = poly.cellulation.surface
    cx, _, lab, t = ball_from_cellulation(s, poly.exterior, choose_apex(s))
    t0 = time.perf_counter()
    sol = solve_structure(cx, t)
    dt = time.perf_counter() - t0
    dev = develop(cx, sol.assignment)
    order = sorted(range(cx.num_vertices), key=lambda c: lab[c])
    got = [dev.points()[c] for c in order]
    got = [z if z == INF else z.conjugate() for z in got]
    want = [from_pair(from_sphere(x)) for x in poly.points]
    return {
        "n": n,
        "tets": cx.num_tets,
        "status": sol.status_label(),
        "iterations": sol.iterations,
        "volume": sol.volume,
        "max_shear": sol.max_shear,
        "same_polyhedron": mobius_equivalent(got, want, tol=1e-6),
        "length_mismatch": lengths_from_schlafli(cx, t, sol).distance(developed_lengths(dev)),
        "seconds": dt,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 10, 20, 40])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>4} {'tets':>5} {'status':>10} {'its':>4} {'volume':>12} {'shear':>9} {'same':>5} {'dL':>9} {'sec':>6}")
    for n in args.sizes:
        for _ in range(args.repeats):
            r = run_one(n, rng)
            print(f"{r['n']:4d} {r['tets']:5d} {r['status']:>10} {r['iterations']:4d} {r['volume']:12.8f} "
                  f"{r['max_shear']:9.1e} {str(r['same_polyhedron']):>5} {r['length_mismatch']:9.1e} {r['seconds']:6.2f}")


if __name__ == "__main__":
    main()
