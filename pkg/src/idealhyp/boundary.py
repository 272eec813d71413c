"""Induced boundary data: lengths modulo horospheres, shifts, completeness."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angles import AngleTarget
from .complex import IdealComplex
from .geom import DevelopedComplex, cross_ratio, horo_distance
from .solver import SolvedStructure, constraint_multipliers
from .surface import Surface

COMPLETE_TOL = 1e-9


class IncompleteShiftError(ValueError):
    pass


class NeedsSubdivisionError(ValueError):
    pass


def vertex_move_matrix(surface: Surface) -> np.ndarray:
    """Columns: adding 1 to the horosphere parameter at vertex v (loops count twice)."""
    m = np.zeros((surface.num_edges, surface.num_vertices))
    for e, (u, v) in enumerate(surface.edge_ends):
        m[e, u] += 1
        m[e, v] += 1
    return m


@dataclass
class LengthClass:
    """Edge lengths of a boundary surface modulo one constant per vertex."""

    surface: Surface
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != self.surface.num_edges:
            raise ValueError("one length per edge is required")

    def canonical(self) -> np.ndarray:
        """Projection orthogonal to the span of per-vertex moves."""
        M = vertex_move_matrix(self.surface)
        coef, *_ = np.linalg.lstsq(M, self.values, rcond=None)
        return self.values - M @ coef

    def distance(self, other: "LengthClass") -> float:
        return float(np.max(np.abs(self.canonical() - other.canonical()), initial=0.0))

    def equals(self, other: "LengthClass", tol: float = 1e-9) -> bool:
        return self.surface.num_edges == other.surface.num_edges and self.distance(other) <= tol


@dataclass
class ShiftVector:
    surface: Surface
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def vertex_sums(self) -> np.ndarray:
        return vertex_move_matrix(self.surface).T @ self.values - _loop_correction(self.surface, self.values)

    def is_complete(self, tol: float = COMPLETE_TOL) -> bool:
        return bool(np.all(np.abs(self.vertex_sums()) <= tol))


def _loop_correction(surface: Surface, values: np.ndarray) -> np.ndarray:
    # a loop edge contributes once to its vertex's shift sum
    out = np.zeros(surface.num_vertices)
    for e, (u, v) in enumerate(surface.edge_ends):
        if u == v:
            out[u] += values[e]
    return out


def _quad(surface: Surface, e: int):
    """(p, c, q, d) with boundary triangles (p, c, q), (q, d, p), plus side info."""
    (f1, s1), (f2, s2) = surface.edge_sides[e]
    if len(surface.faces[f1]) != 3 or len(surface.faces[f2]) != 3:
        raise NeedsSubdivisionError(f"edge {e} borders a non-triangular face; subdivide the cellulation first")
    p, q = surface.faces[f1][s1], surface.faces[f1][(s1 + 1) % 3]
    d = surface.faces[f1][(s1 + 2) % 3]
    c = surface.faces[f2][(s2 + 2) % 3]
    return p, c, q, d, (f1, s1), (f2, s2)


def shift_matrix(surface: Surface) -> np.ndarray:
    """Linear map from edge lengths to shifts: 2 delta = l(pc) - l(cq) + l(qd) - l(dp)."""
    B = np.zeros((surface.num_edges, surface.num_edges))
    for e in range(surface.num_edges):
        _, _, _, _, (f1, s1), (f2, s2) = _quad(surface, e)
        fe1, fe2 = surface.face_edges[f1], surface.face_edges[f2]
        B[e, fe2[(s2 + 1) % 3]] += 0.5  # p -> c
        B[e, fe2[(s2 + 2) % 3]] -= 0.5  # c -> q
        B[e, fe1[(s1 + 1) % 3]] += 0.5  # q -> d
        B[e, fe1[(s1 + 2) % 3]] -= 0.5  # d -> p
    return B


def quad_shift(p, c, q, d) -> float:
    """Shift along edge p q of the ideal quad with triangles (p, c, q), (q, d, p).

    Sending p to infinity and q to 0, the feet of the perpendiculars from c
    and d sit at heights |c| and |d|; the shift is log|d| - log|c|.
    """
    w = cross_ratio(p, q, c, d)
    return math.log(abs(w))


def lengths_to_shifts(surface: Surface, L: LengthClass) -> ShiftVector:
    return ShiftVector(surface, shift_matrix(surface) @ L.values)


def shifts_to_lengths(surface: Surface, sh: ShiftVector, tol: float = COMPLETE_TOL) -> LengthClass:
    if not sh.is_complete(tol):
        raise IncompleteShiftError(f"shift vector is not complete (max vertex sum {np.max(np.abs(sh.vertex_sums())):.3e})")
    B = shift_matrix(surface)
    l, *_ = np.linalg.lstsq(B, sh.values, rcond=None)
    return LengthClass(surface, LengthClass(surface, l).canonical())


def boundary_shifts(dev: DevelopedComplex) -> ShiftVector:
    s = dev.cx.boundary
    pos = dev.positions
    vals = np.zeros(s.num_edges)
    for e in range(s.num_edges):
        p, c, q, d, *_ = _quad(s, e)
        vals[e] = quad_shift(pos[p], pos[c], pos[q], pos[d])
    return ShiftVector(s, vals)


def developed_lengths(dev: DevelopedComplex, sizes=None) -> LengthClass:
    """Truncated boundary edge lengths for the given horosphere sizes (default 1)."""
    s = dev.cx.boundary
    sizes = np.ones(s.num_vertices) if sizes is None else np.asarray(sizes, dtype=float)
    vals = np.array([horo_distance(dev.positions[u], dev.positions[v], sizes[u], sizes[v]) for u, v in s.edge_ends])
    return LengthClass(s, vals)


def lengths_from_schlafli(cx: IdealComplex, t: AngleTarget, s: SolvedStructure) -> LengthClass:
    """L_e = -2 dV*/d theta_e from the constraint multipliers at the optimum."""
    if not s.converged:
        raise ValueError(f"lengths need a converged structure, got {s.status_label()}")
    _, lam = constraint_multipliers(cx, t, s.assignment)
    vals = np.array([-2.0 * lam[c] for c in cx.boundary_edge_ids])
    return LengthClass(cx.boundary, vals)


def shift_map_rank(surface: Surface, rtol: float = 1e-8) -> int:
    """Numerical rank of the length -> shift map (e - v when it is a bijection onto complete shifts)."""
    sv = np.linalg.svd(shift_matrix(surface), compute_uv=False)
    return int(np.sum(sv > rtol * sv[0])) if len(sv) else 0
