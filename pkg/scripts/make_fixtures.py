"""Write the shipped fixture files into fixtures/."""
import math
import pathlib

import numpy as np

from idealhyp.angles import AngleAssignment, AngleTarget, edge_angle_totals
from idealhyp.fixtures import (
    bipyramid,
    cone_octahedron,
    degenerate_target,
    icosahedron_graph,
    k4_graph,
    octahedron_graph,
    regular_target,
    right_angled_target,
    single_tet,
)
from idealhyp.formats import GraphDoc, TriangulationDoc, serialize_graph, serialize_triangulation

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def write(name, text):
    (OUT / name).write_text(text)
    print("wrote", OUT / name)


def main():
    OUT.mkdir(exist_ok=True)
    cx = single_tet()
    write("single_tet.tri", serialize_triangulation(TriangulationDoc.from_complex(cx, regular_target(cx))))

    cx = bipyramid()
    reg = AngleAssignment(np.full((2, 3), math.pi / 3))
    t = AngleTarget(edge_angle_totals(cx, reg))
    write("bipyramid.tri", serialize_triangulation(TriangulationDoc.from_complex(cx, t)))

    cx = cone_octahedron()
    write("cone_octahedron.tri", serialize_triangulation(TriangulationDoc.from_complex(cx, right_angled_target(cx))))

    cx, t = degenerate_target()
    write("degenerate.tri", serialize_triangulation(TriangulationDoc.from_complex(cx, t)))

    for name, tris in (("k4", k4_graph()), ("octahedron", octahedron_graph()), ("icosahedron", icosahedron_graph())):
        nv = 1 + max(v for tri in tris for v in tri)
        write(f"{name}.graph", serialize_graph(GraphDoc(nv, tris)))


if __name__ == "__main__":
    main()
