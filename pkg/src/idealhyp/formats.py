"""Text formats for triangulations and graphs, and deterministic JSON dumps.

See FORMATS.md at the repository root for the grammar.
"""
from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .angles import AngleTarget
from .complex import GluingData, IdealComplex

TRI_HEADER = "idealhyp-triangulation 1"
GRAPH_HEADER = "idealhyp-graph 1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int = 1):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


class TargetResolutionError(ValueError):
    pass


# ---------------------------------------------------------------- expressions

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def eval_angle(text: str) -> float:
    """Evaluate a numeric literal or an arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as err:
        raise ValueError(f"bad angle expression {text!r}") from err


# ---------------------------------------------------------------- triangulations


@dataclass
class TriangulationDoc:
    gluing: GluingData
    targets: dict[tuple[int, int], float] = field(default_factory=dict)  # (tet, slot) -> total
    flat: set[tuple[int, int]] = field(default_factory=set)
    circuits: list[list[tuple[int, int]]] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, TriangulationDoc):
            return NotImplemented
        return (
            self.gluing.num_tets == other.gluing.num_tets
            and [[None if g is None else (g[0], g[1], tuple(g[2])) for g in row] for row in self.gluing.gluings]
            == [[None if g is None else (g[0], g[1], tuple(g[2])) for g in row] for row in other.gluing.gluings]
            and self.targets == other.targets
            and self.flat == other.flat
            and self.circuits == other.circuits
        )

    def resolve(self, cx: IdealComplex) -> tuple[AngleTarget, tuple[tuple[int, ...], ...]]:
        """Angle target per edge class and declared circuits as surface edge ids."""
        vals: dict[int, float] = {}
        for (t, s), x in sorted(self.targets.items()):
            e = int(cx.edge_of_slot[t, s])
            if e in vals and abs(vals[e] - x) > 1e-12:
                raise TargetResolutionError(f"edge {e} has conflicting targets {vals[e]!r} and {x!r}")
            vals[e] = x
        flat = {int(cx.edge_of_slot[t, s]) for t, s in self.flat}
        out = np.zeros(len(cx.edge_classes))
        for ec in cx.edge_classes:
            if ec.index in vals:
                out[ec.index] = vals[ec.index]
            elif ec.interior:
                out[ec.index] = 2 * math.pi
            else:
                t, s = ec.slots[0]
                raise TargetResolutionError(f"boundary edge {ec.index} (tet {t}, slot {s}) has no target")
        declared = []
        for c in self.circuits:
            ids = []
            for t, s in c:
                e = int(cx.edge_of_slot[t, s])
                if e not in cx.surface_edge_of_class:
                    raise TargetResolutionError(f"circuit edge (tet {t}, slot {s}) is interior")
                ids.append(cx.surface_edge_of_class[e])
            declared.append(tuple(ids))
        return AngleTarget(out, frozenset(flat)), tuple(declared)

    @classmethod
    def from_complex(cls, cx: IdealComplex, t: AngleTarget, circuits=()) -> "TriangulationDoc":
        """Targets written on each edge's first slot; interior 2 pi targets omitted."""
        targets, flat = {}, set()
        for ec in cx.edge_classes:
            rep = min(ec.slots)
            x = float(t.values[ec.index])
            if ec.interior and x == 2 * math.pi:
                continue
            targets[rep] = x
            if ec.index in t.flat:
                flat.add(rep)
        return cls(cx.gluing, targets, flat, [list(c) for c in circuits])


def _int(tok: str, line: int, col: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", line, col) from None


def _tokens(line: str) -> list[tuple[str, int]]:
    """Whitespace-separated tokens with 1-based columns, comments removed."""
    code = line.split("#", 1)[0]
    out, i = [], 0
    while i < len(code):
        if code[i].isspace():
            i += 1
            continue
        j = i
        while j < len(code) and not code[j].isspace():
            j += 1
        out.append((code[i:j], i + 1))
        i = j
    return out


def parse_triangulation(text: str) -> TriangulationDoc:
    lines = text.splitlines()
    rows = [(k + 1, _tokens(ln)) for k, ln in enumerate(lines)]
    rows = [(k, t) for k, t in rows if t]
    if not rows or " ".join(tok for tok, _ in rows[0][1]) != TRI_HEADER:
        raise ParseError(f"missing header {TRI_HEADER!r}", rows[0][0] if rows else 1)
    if len(rows) < 2 or rows[1][1][0][0] != "tets" or len(rows[1][1]) != 2:
        raise ParseError("expected 'tets <count>'", rows[1][0] if len(rows) > 1 else 1)
    n = _int(rows[1][1][1][0], rows[1][0], rows[1][1][1][1])
    if n < 1:
        raise ParseError("need at least one tetrahedron", rows[1][0], rows[1][1][1][1])
    gl: list[list[Any]] = [[None] * 4 for _ in range(n)]
    seen: set[tuple[int, int]] = set()
    doc = TriangulationDoc(GluingData(n, gl))
    section = "glue"
    for ln, toks in rows[2:]:
        head, col = toks[0]
        if head in ("targets", "contractible"):
            if len(toks) != 1:
                raise ParseError(f"'{head}' takes no arguments", ln, toks[1][1])
            section = head
            continue
        if head == "glue" and section == "glue":
            if len(toks) < 4:
                raise ParseError("expected 'glue <tet> <face> -> <tet> <face> <perm>' or 'glue <tet> <face> boundary'", ln, col)
            t = _int(toks[1][0], ln, toks[1][1])
            f = _int(toks[2][0], ln, toks[2][1])
            if not (0 <= t < n and 0 <= f < 4):
                raise ParseError(f"(tet {t}, face {f}) out of range", ln, toks[1][1])
            if (t, f) in seen:
                raise ParseError(f"(tet {t}, face {f}) listed twice", ln, toks[1][1])
            seen.add((t, f))
            if toks[3][0] == "boundary" and len(toks) == 4:
                continue
            if toks[3][0] != "->" or len(toks) != 7:
                raise ParseError("expected '-> <tet> <face> <perm>'", ln, toks[3][1])
            t2 = _int(toks[4][0], ln, toks[4][1])
            f2 = _int(toks[5][0], ln, toks[5][1])
            ptok, pcol = toks[6]
            if len(ptok) != 4 or not ptok.isdigit() or sorted(ptok) != list("0123"):
                raise ParseError(f"permutation must be four distinct digits 0-3, got {ptok!r}", ln, pcol)
            gl[t][f] = (t2, f2, tuple(int(c) for c in ptok))
        elif head == "target" and section == "targets":
            if len(toks) not in (4, 5) or (len(toks) == 5 and toks[4][0] != "flat"):
                raise ParseError("expected 'target <tet> <slot> <angle> [flat]'", ln, col)
            t = _int(toks[1][0], ln, toks[1][1])
            s = _int(toks[2][0], ln, toks[2][1])
            if not (0 <= t < n and 0 <= s < 6):
                raise ParseError(f"(tet {t}, slot {s}) out of range", ln, toks[1][1])
            try:
                doc.targets[(t, s)] = eval_angle(toks[3][0])
            except ValueError as err:
                raise ParseError(str(err), ln, toks[3][1]) from None
            if len(toks) == 5:
                doc.flat.add((t, s))
        elif head == "circuit" and section == "contractible":
            edges = []
            for tok, c in toks[1:]:
                parts = tok.split(":")
                if len(parts) != 2:
                    raise ParseError(f"expected <tet>:<slot>, got {tok!r}", ln, c)
                t, s = _int(parts[0], ln, c), _int(parts[1], ln, c)
                if not (0 <= t < n and 0 <= s < 6):
                    raise ParseError(f"(tet {t}, slot {s}) out of range", ln, c)
                edges.append((t, s))
            if not edges:
                raise ParseError("empty circuit", ln, col)
            doc.circuits.append(edges)
        else:
            raise ParseError(f"unexpected {head!r} in section {section!r}", ln, col)
    missing = [(t, f) for t in range(n) for f in range(4) if (t, f) not in seen]
    if missing:
        t, f = missing[0]
        raise ParseError(f"no gluing line for (tet {t}, face {f})", len(lines) + 1)
    return doc


def serialize_triangulation(doc: TriangulationDoc) -> str:
    out = [TRI_HEADER, f"tets {doc.gluing.num_tets}"]
    for t, row in enumerate(doc.gluing.gluings):
        for f, g in enumerate(row):
            if g is None:
                out.append(f"glue {t} {f} boundary")
            else:
                out.append(f"glue {t} {f} -> {g[0]} {g[1]} {''.join(str(x) for x in g[2])}")
    if doc.targets:
        out.append("targets")
        for (t, s), x in sorted(doc.targets.items()):
            out.append(f"target {t} {s} {x!r}" + (" flat" if (t, s) in doc.flat else ""))
    if doc.circuits:
        out.append("contractible")
        for c in doc.circuits:
            out.append("circuit " + " ".join(f"{t}:{s}" for t, s in c))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- graphs


@dataclass
class GraphDoc:
    num_vertices: int
    triangles: list[tuple[int, int, int]]


def parse_graph(text: str) -> GraphDoc:
    rows = [(k + 1, _tokens(ln)) for k, ln in enumerate(text.splitlines())]
    rows = [(k, t) for k, t in rows if t]
    if not rows or " ".join(tok for tok, _ in rows[0][1]) != GRAPH_HEADER:
        raise ParseError(f"missing header {GRAPH_HEADER!r}", rows[0][0] if rows else 1)
    if len(rows) < 2 or rows[1][1][0][0] != "vertices" or len(rows[1][1]) != 2:
        raise ParseError("expected 'vertices <count>'", rows[1][0] if len(rows) > 1 else 1)
    nv = _int(rows[1][1][1][0], rows[1][0], rows[1][1][1][1])
    tris = []
    for ln, toks in rows[2:]:
        head, col = toks[0]
        if head != "triangle" or len(toks) != 4:
            raise ParseError("expected 'triangle <a> <b> <c>'", ln, col)
        tri = tuple(_int(tok, ln, c) for tok, c in toks[1:])
        for (tok, c), v in zip(toks[1:], tri):
            if not 0 <= v < nv:
                raise ParseError(f"vertex {v} out of range", ln, c)
        if len(set(tri)) != 3:
            raise ParseError("triangle repeats a vertex", ln, col)
        tris.append(tri)
    if not tris:
        raise ParseError("no triangles", len(rows) + 1)
    return GraphDoc(nv, tris)  # type: ignore[arg-type]


def serialize_graph(g: GraphDoc) -> str:
    out = [GRAPH_HEADER, f"vertices {g.num_vertices}"]
    out += [f"triangle {a} {b} {c}" for a, b, c in g.triangles]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- JSON


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dump_json(obj: Any, indent: int = 2) -> str:
    """JSON with insertion-ordered keys and 17 significant digits for floats."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{enc(str(k), 0)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float, np.integer, np.floating, str, bool)) or v is None for v in o):
                return "[" + ", ".join(enc(v, 0) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, np.ndarray):
            return enc(o.tolist(), level)
        if o is None:
            return "null"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return fmt_float(float(o))
        if isinstance(o, complex):
            return "[" + fmt_float(o.real) + ", " + fmt_float(o.imag) + "]"
        if isinstance(o, str):
            return json.dumps(o)
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def point_json(z: complex):
    if math.isinf(z.real) or math.isinf(z.imag):
        return "inf"
    return [z.real, z.imag]
