"""Walk the octahedron targets from right angles toward the degenerate fixture.

Along the segment the critical 6-circuit sums to (3 - s) pi, so the volume
maximizer exists for s < 1 and its smallest angle should collapse as s -> 1.
"""
import argparse

import numpy as np

from idealhyp.angles import AngleTarget
from idealhyp.fixtures import degenerate_target, right_angled_target
from idealhyp.solver import solve_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=8)
    args = ap.parse_args()
    cx, deg = degenerate_target()
    ra = right_angled_target(cx)
    print(f"{'s':>10} {'status':>14} {'volume':>12} {'min angle':>10}")
    for k in range(args.steps + 1):
        s = 1 - 2.0 ** (-k) if k < args.steps else 1.0
        t = AngleTarget((1 - s) * ra.values + s * deg.values)
        sol = solve_structure(cx, t)
        print(f"{s:10.6f} {sol.status_label():>14} {sol.volume:12.8f} {float(np.min(sol.assignment.angles)):10.2e}")


if __name__ == "__main__":
    main()
