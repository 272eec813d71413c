"""Ideal hyperbolic structures from dihedral angles: validate, solve, pack, holonomy, schlafli-check.

Exit codes: 0 success, 1 domain failure (report written), 2 input or parse failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from .angles import dihedral_data_from_targets, validate_dihedral_data, validate_theta
from .boundary import boundary_shifts, developed_lengths, lengths_from_schlafli
from .complex import ComplexValidationError, build_complex, euler_check
from .formats import (
    ParseError,
    TargetResolutionError,
    dump_json,
    parse_graph,
    parse_triangulation,
    point_json,
)
from .geom import CertificationError, develop, from_pair, schlafli_check
from .packing import PackingError, SvgView, emit_svg, koebe_pack, thurston_augment, triangulation_from_faces, vertex_angle_sums
from .solver import InfeasibleError, SolveOptions, solve_structure
from .surface import SurfaceError
from .teich import det2, pentagon_holonomy

THREADS_ENV = "IDEALHYP_THREADS"
SCHLAFLI_THRESHOLD = 1e-5


class CliInputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        raise CliInputError(f"cannot read {path}: {err.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_complex(path: str):
    doc = parse_triangulation(_read(path))
    cx = build_complex(doc.gluing)
    t, declared = doc.resolve(cx)
    return doc, cx, t, declared


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    _, cx, t, declared = _load_complex(args.file)
    counts = cx.counts()
    rep = validate_theta(cx, t)
    drep = validate_dihedral_data(dihedral_data_from_targets(cx, t, declared), max_len=args.max_len)
    euler = euler_check(cx)
    ok = euler and rep.ok and drep.ok
    _emit(dump_json({
        "ok": ok,
        "counts": counts,
        "euler": euler,
        "ball": cx.is_ball(),
        "theta": rep.as_dict(),
        "dihedral": drep.as_dict(),
    }), args.out)
    return 0 if ok else 1


def _options(args) -> SolveOptions:
    return SolveOptions(
        max_iters=args.max_iters,
        grad_tol=args.tol,
        shear_tol=args.shear_tol,
        dump_iterates=args.dump_iterates,
    )


def cmd_solve(args) -> int:
    _, cx, t, declared = _load_complex(args.file)
    rep = validate_theta(cx, t)
    dump: dict = {"counts": cx.counts(), "euler": euler_check(cx), "seed": args.seed, "threads": args.threads,
                  "validation": rep.as_dict()}
    if not rep.ok:
        dump["status"] = "InvalidTargets"
        _emit(dump_json(dump), args.out)
        return 1
    try:
        sol = solve_structure(cx, t, _options(args), validate=False)
    except InfeasibleError as err:
        dump["status"] = "Infeasible"
        dump["certificate"] = err.certificate
        dump["message"] = str(err)
        _emit(dump_json(dump), args.out)
        return 1
    dump.update({
        "status": sol.status_label(),
        "volume": sol.volume,
        "iterations": sol.iterations,
        "gradient_norm": sol.gradient_norm,
        "max_shear_residual": sol.max_shear,
        "interior_shear_residuals": sol.interior_shear_residuals,
        "angles": sol.assignment.angles,
        "volumes": sol.volumes,
    })
    if args.dump_iterates:
        dump["iterates"] = [x.reshape(-1, 3) for x in sol.iterates]
    if sol.degeneration is not None:
        dump["degeneration"] = sol.degeneration.as_dict()
    if sol.converged:
        L = lengths_from_schlafli(cx, t, sol)
        dump["lengths"] = L.canonical()
        if cx.is_ball():
            try:
                dev = develop(cx, sol.assignment)
            except CertificationError as err:
                dump["develop_error"] = str(err)
                _emit(dump_json(dump), args.out)
                return 1
            dump["developed"] = {
                "positions": [point_json(from_pair(p)) for p in dev.positions],
                "placement_spread": dev.max_spread,
                "concyclic_residual": float(np.max(dev.face_residuals, initial=0.0)),
                "dihedral": dev.dihedral,
                "dihedral_residual": float(np.max(np.abs(dev.dihedral - t.values[cx.boundary_edge_ids]), initial=0.0)),
            }
            if cx.boundary.is_triangulation():
                sh = boundary_shifts(dev)
                dump["developed"]["shifts"] = sh.values
                dump["developed"]["shift_vertex_sums"] = sh.vertex_sums()
                dump["developed"]["length_mismatch"] = L.distance(developed_lengths(dev))
    _emit(dump_json(dump), args.out)
    return 0 if sol.converged else 1


def cmd_pack(args) -> int:
    g = parse_graph(_read(args.file))
    try:
        tri = triangulation_from_faces(g.triangles, g.num_vertices)
    except SurfaceError as err:
        _emit(dump_json({"status": "NotASphere", "message": str(err)}), args.out)
        return 1
    try:
        cfg = koebe_pack(tri, apex=args.apex)
    except (PackingError, SurfaceError) as err:
        cert = getattr(err, "certificate", {})
        _emit(dump_json({"status": "Failed", "message": str(err), "certificate": cert}), args.out)
        return 1
    aug = thurston_augment(tri)
    sums = vertex_angle_sums(aug, cfg)
    dump = {
        "status": "Packed",
        "num_circles": len(cfg.caps),
        "num_white": len(cfg.white()),
        "num_black": len(cfg.black()),
        "max_tangency_residual": cfg.max_tangency_residual(),
        "max_angle_residual": cfg.max_angle_residual(),
        "max_vertex_angle_defect": float(np.max(np.abs(sums - 2 * math.pi))),
        "info": cfg.info,
        "circles": [
            {"label": lbl, "role": role, "normal": list(cap.n), "offset": cap.d,
             "spherical_radius": cap.angular_radius}
            for lbl, role, cap in zip(cfg.labels, cfg.roles, cfg.caps)
        ],
        "incidences": [
            {"circles": [cfg.labels[x.i], cfg.labels[x.j]], "kind": x.kind, "angle": x.angle, "residual": x.residual}
            for x in cfg.incidences
        ],
        "tangency_points": cfg.points,
    }
    _emit(dump_json(dump), args.out)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(emit_svg(cfg, SvgView(size=args.size, extent=args.extent, annotate=args.annotate)))
    return 0


def _over(x: Fraction, den: int) -> str:
    return f"{x.numerator * (den // x.denominator)}/{den}" if den % x.denominator == 0 else str(x)


def cmd_holonomy(args) -> int:
    m = pentagon_holonomy()
    d = det2(m)
    den = 32
    _emit(dump_json({
        "matrix": [[_over(x, den) for x in row] for row in m],
        "matrix_reduced": [[str(x) for x in row] for row in m],
        "determinant": str(d),
        "unimodular": d == 1,
    }), args.out)
    return 0


def cmd_schlafli_check(args) -> int:
    samples = schlafli_check(args.samples, args.seed, args.step)
    errs = [s.rel_error for s in samples]
    worst = max(errs) if errs else None
    ok = worst is None or worst < SCHLAFLI_THRESHOLD
    _emit(dump_json({
        "samples": args.samples,
        "seed": args.seed,
        "step": args.step,
        "max_rel_error": worst,
        "threshold": SCHLAFLI_THRESHOLD,
        "ok": ok,
        "results": [
            {"angles": list(s.angles), "direction": list(s.direction), "finite_difference": s.finite_difference,
             "formula": s.formula, "rel_error": s.rel_error}
            for s in samples
        ],
    }), args.out)
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idealhyp", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="seed for randomized commands")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check gluings, Euler relation and angle conditions")
    v.add_argument("file")
    v.add_argument("--max-len", type=int, default=12, help="longest non-elementary circuit searched")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="maximize volume and report the structure")
    s.add_argument("file")
    s.add_argument("--tol", type=float, default=1e-10, help="projected gradient tolerance")
    s.add_argument("--shear-tol", type=float, default=1e-8)
    s.add_argument("--max-iters", type=int, default=200)
    s.add_argument("--dump-iterates", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    k = sub.add_parser("pack", help="Koebe packing of a triangulated sphere")
    k.add_argument("file")
    k.add_argument("--svg")
    k.add_argument("--apex", type=int, default=None, help="cone apex (augmented vertex id)")
    k.add_argument("--size", type=int, default=600)
    k.add_argument("--extent", type=float, default=3.0)
    k.add_argument("--annotate", action="store_true")
    k.add_argument("--out")
    k.set_defaults(func=cmd_pack)

    h = sub.add_parser("holonomy", help="pentagon holonomy matrix in exact arithmetic")
    h.add_argument("--out")
    h.set_defaults(func=cmd_holonomy)

    c = sub.add_parser("schlafli-check", help="finite-difference check of the ideal Schlafli formula")
    c.add_argument("--samples", type=int, default=100)
    c.add_argument("--step", type=float, default=1e-5)
    c.add_argument("--out")
    c.set_defaults(func=cmd_schlafli_check)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    if args.threads is None:
        args.threads = _default_threads()
    try:
        return args.func(args)
    except (ParseError, CliInputError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ComplexValidationError as err:
        print(f"error: invalid gluing: {err}", file=sys.stderr)
        return 2
    except TargetResolutionError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
