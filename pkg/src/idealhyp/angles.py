"""Angle assignments, edge totals, and membership checks for angle targets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .complex import EDGE_PAIR, IdealComplex
from .loba import TetAngles
from .surface import Circuit, Surface, enumerate_circuits

TWO_PI = 2.0 * math.pi
EXACT_TOL = 1e-9
SOLVED_TOL = 1e-7


class AssignmentError(ValueError):
    pass


@dataclass
class AngleAssignment:
    """Per-tetrahedron angles, shape (n, 3); column k is edge pair k."""

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float).reshape(-1, 3)

    @classmethod
    def from_tets(cls, tets: Sequence[TetAngles]) -> "AngleAssignment":
        return cls(np.array([t.as_array() for t in tets]))

    @classmethod
    def from_flat(cls, x: np.ndarray) -> "AngleAssignment":
        return cls(np.asarray(x, dtype=float).reshape(-1, 3))

    @property
    def flat(self) -> np.ndarray:
        return self.angles.reshape(-1)

    def __len__(self) -> int:
        return len(self.angles)

    def tet(self, t: int) -> TetAngles:
        a, b, _ = self.angles[t]
        return TetAngles.from_two(float(a), float(b))

    def slot_angle(self, t: int, slot: int) -> float:
        return float(self.angles[t, EDGE_PAIR[slot]])

    def check(self, tol: float = 1e-9) -> None:
        if np.any(self.angles <= 0) or np.any(self.angles >= math.pi):
            raise AssignmentError("angles must lie in (0, pi)")
        if np.any(np.abs(self.angles.sum(axis=1) - math.pi) > tol):
            raise AssignmentError("per-tetrahedron angle sums must be pi")


@dataclass
class AngleTarget:
    """Prescribed total angle per edge class.

    ``flat`` holds boundary edge classes that subdivide a polygonal face; they
    are the only boundary edges allowed to reach pi (exterior angle 0).
    """

    values: np.ndarray
    flat: frozenset = frozenset()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.flat = frozenset(int(x) for x in self.flat)

    @classmethod
    def from_boundary(cls, cx: IdealComplex, boundary: dict[int, float], flat: Iterable[int] = ()) -> "AngleTarget":
        vals = np.full(len(cx.edge_classes), TWO_PI)
        for e, v in boundary.items():
            vals[e] = v
        return cls(vals, frozenset(flat))

    def exterior(self, cx: IdealComplex) -> np.ndarray:
        """Exterior angles on boundary surface edges, in surface edge order."""
        return np.array([math.pi - self.values[c] for c in cx.boundary_edge_ids])

    def is_smooth(self, cx: IdealComplex) -> bool:
        return all(abs(self.values[e] - TWO_PI) <= EXACT_TOL for e in cx.interior_edges)


@dataclass
class Violation:
    kind: str
    where: str
    residual: float

    def as_dict(self) -> dict:
        return {"kind": self.kind, "where": self.where, "residual": self.residual}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    complete: bool = True
    checked_circuits: int = 0
    limiting: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, where: str, residual: float) -> None:
        self.violations.append(Violation(kind, where, float(residual)))

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        self.violations += other.violations
        self.warnings += other.warnings
        self.complete = self.complete and other.complete
        self.limiting += other.limiting
        self.checked_circuits += other.checked_circuits
        return self

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.as_dict() for v in self.violations],
            "warnings": list(self.warnings),
            "complete": self.complete,
            "checked_circuits": self.checked_circuits,
            "limiting": [v.as_dict() for v in self.limiting],
        }


def slot_matrix(cx: IdealComplex) -> np.ndarray:
    """Linear map from flat per-tet angles (3n) to edge-class totals."""
    m = np.zeros((len(cx.edge_classes), 3 * cx.num_tets))
    for ec in cx.edge_classes:
        for t, s in ec.slots:
            m[ec.index, 3 * t + EDGE_PAIR[s]] += 1.0
    return m


def edge_angle_totals(cx: IdealComplex, a: AngleAssignment) -> np.ndarray:
    if len(a) != cx.num_tets:
        raise AssignmentError(f"assignment has {len(a)} tetrahedra, complex has {cx.num_tets}")
    out = np.zeros(len(cx.edge_classes))
    for ec in cx.edge_classes:
        out[ec.index] = sum(a.angles[t, EDGE_PAIR[s]] for t, s in ec.slots)
    return out


def vertex_gauss_bonnet(cx: IdealComplex, totals: np.ndarray) -> np.ndarray:
    """Per vertex: exterior boundary sum - 2 pi - interior excess sum."""
    res = np.full(cx.num_vertices, -TWO_PI)
    for ec in cx.edge_classes:
        for v in ec.ends:
            if ec.interior:
                res[v] -= totals[ec.index] - TWO_PI
            else:
                res[v] += math.pi - totals[ec.index]
    return res


def validate_theta(cx: IdealComplex, t: AngleTarget, tol: float = EXACT_TOL) -> ValidationReport:
    rep = ValidationReport()
    if len(t.values) != len(cx.edge_classes):
        rep.add("size", f"{len(t.values)} targets for {len(cx.edge_classes)} edges", len(t.values))
        return rep
    for ec in cx.edge_classes:
        x = float(t.values[ec.index])
        if not math.isfinite(x):
            rep.add("range", f"edge {ec.index}", float("nan"))
        elif ec.interior:
            if not (0.0 < x < 4 * math.pi):
                rep.add("range", f"interior edge {ec.index}", x)
            elif x > TWO_PI + tol:
                rep.warnings.append(f"interior edge {ec.index} total {x!r} exceeds 2pi")
        else:
            hi_ok = x < math.pi or (ec.index in t.flat and x <= math.pi + tol)
            if not (x > 0.0 and hi_ok):
                rep.add("range", f"boundary edge {ec.index}", x)
    if rep.violations:
        return rep
    for v, r in enumerate(vertex_gauss_bonnet(cx, t.values)):
        if abs(r) > tol:
            rep.add("gauss-bonnet", f"vertex {v}", r)
    return rep


@dataclass
class DihedralData:
    """Exterior dihedral angles on the edges of a boundary cellulation."""

    surface: Surface
    w: np.ndarray
    declared: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if len(self.w) != self.surface.num_edges:
            raise ValueError("one exterior angle per edge is required")


def structural_checks(surface: Surface) -> ValidationReport:
    """Self-adjacent faces, doubled dual edges, repeated vertices in a face."""
    rep = ValidationReport()
    shared: dict[tuple[int, int], list[int]] = {}
    for e, (a, b) in enumerate(surface.dual_edges()):
        if a == b:
            rep.add("self-adjacent-face", f"face {a} across edge {e}", 0.0)
        else:
            shared.setdefault((min(a, b), max(a, b)), []).append(e)
    for (a, b), es in sorted(shared.items()):
        if len(es) > 1:
            rep.add("doubled-edge", f"faces {a},{b} share edges {es}", float(len(es)))
    for f, verts in enumerate(surface.faces):
        if len(set(verts)) != len(verts):
            rep.add("repeated-vertex", f"face {f}", 0.0)
    return rep


def circuit_sum(d: DihedralData, c: Circuit) -> float:
    return float(sum(d.w[e] for e in c.edges))


def validate_dihedral_data(d: DihedralData, max_len: int = 12, tol: float = EXACT_TOL) -> ValidationReport:
    rep = ValidationReport()
    for e, x in enumerate(d.w):
        if not (0.0 < x < math.pi):
            rep.add("range", f"edge {e}", float(x))
    rep.merge(structural_checks(d.surface))
    circuits, complete = enumerate_circuits(d.surface, max_len, d.declared)
    rep.complete = complete
    if not complete:
        rep.warnings.append(f"non-elementary circuits longer than {max_len} were not checked")
    for c in circuits:
        s = circuit_sum(d, c)
        if c.elementary:
            rep.checked_circuits += 1
            if abs(s - TWO_PI) > tol:
                rep.add("elementary-circuit", f"vertex {c.vertex} edges {list(c.edges)}", s - TWO_PI)
        elif c.contractible in ("known", "declared"):
            rep.checked_circuits += 1
            if s < TWO_PI - tol:
                rep.add("non-elementary-circuit", f"edges {list(c.edges)}", s - TWO_PI)
            elif s <= TWO_PI + tol:
                # closure of the admissible set: structures degenerate along this circuit
                rep.limiting.append(Violation("limiting-circuit", f"edges {list(c.edges)}", s - TWO_PI))
                rep.warnings.append(f"circuit {list(c.edges)} sums to 2pi; the structure degenerates")
    return rep


def dihedral_data_from_targets(cx: IdealComplex, t: AngleTarget, declared=()) -> DihedralData:
    return DihedralData(cx.boundary, t.exterior(cx), tuple(tuple(x) for x in declared))
