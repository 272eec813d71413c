"""Koebe packings of the shipped graphs, written as SVG next to a JSON summary."""
import argparse
import pathlib
import time

from idealhyp.formats import dump_json, parse_graph
from idealhyp.packing import SvgView, emit_svg, koebe_pack, triangulation_from_faces

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="packings", help="output directory")
    ap.add_argument("--extent", type=float, default=3.0)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for path in sorted((ROOT / "fixtures").glob("*.graph")):
        g = parse_graph(path.read_text())
        t0 = time.perf_counter()
        cfg = koebe_pack(triangulation_from_faces(g.triangles, g.num_vertices))
        dt = time.perf_counter() - t0
        (out / f"{path.stem}.svg").write_text(emit_svg(cfg, SvgView(extent=args.extent)))
        radii = [cfg.caps[w].angular_radius for w in cfg.white()]
        summary[path.stem] = {
            "circles": len(cfg.caps),
            "tangency_residual": cfg.max_tangency_residual(),
            "angle_residual": cfg.max_angle_residual(),
            "white_radius_range": [min(radii), max(radii)],
            "seconds": dt,
        }
        print(f"{path.stem:12s} {len(cfg.caps):3d} circles  tangency {cfg.max_tangency_residual():.1e}  {dt:.2f}s")
    (out / "summary.json").write_text(dump_json(summary))


if __name__ == "__main__":
    main()
