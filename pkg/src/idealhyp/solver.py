"""Volume maximization over angle structures with prescribed edge totals.

The feasible set is the affine space {per-tet sums = pi, edge totals = target}
intersected with the open cube (0, pi)^{3n}.  The volume is strictly concave
on it, and its critical point is where every interior shear vanishes.
Newton steps are taken in an orthonormal basis of the constraint null space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .angles import AngleAssignment, AngleTarget, slot_matrix, validate_theta
from .complex import EDGE_PAIR, IdealComplex
from .loba import lobachevsky
from .surface import Circuit, enumerate_circuits


class InfeasibleError(ValueError):
    """No strictly positive angle assignment meets the constraints."""

    def __init__(self, message: str, certificate: dict):
        self.certificate = certificate
        super().__init__(message)


class ConcavityError(RuntimeError):
    """The restricted Hessian was not negative definite (a bug, not an input error)."""


class TargetError(ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__("angle targets fail validation: " + "; ".join(f"{v.kind} at {v.where}" for v in report.violations))


@dataclass
class SolveOptions:
    max_iters: int = 200
    grad_tol: float = 1e-10
    shear_tol: float = 1e-8
    min_angle_guard: float = 1e-8
    armijo: float = 1e-4
    backtrack: float = 0.5
    boundary_fraction: float = 0.5
    degenerate_margin: float = 1e-6
    circuit_tol: float = 1e-6
    circuit_max_len: int = 12
    dump_iterates: bool = False

    def __post_init__(self):
        for name in ("grad_tol", "shear_tol", "min_angle_guard"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass
class Degeneration:
    reason: str  # "a" | "b" | "c"
    detail: str
    circuit: Optional[Circuit] = None
    circuit_sum: Optional[float] = None
    slots: list[tuple[int, int]] = field(default_factory=list)

    def as_dict(self) -> dict:
        d = {"reason": self.reason, "detail": self.detail, "slots": [list(s) for s in self.slots]}
        if self.circuit is not None:
            d["circuit_edges"] = list(self.circuit.edges)
            d["circuit_sum"] = self.circuit_sum
        return d


@dataclass
class SolvedStructure:
    assignment: AngleAssignment
    volume: float
    interior_shear_residuals: np.ndarray
    gradient_norm: float
    status: str  # "Converged" | "Degenerate" | "IterLimit"
    iterations: int
    degeneration: Optional[Degeneration] = None
    volumes: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "Converged"

    @property
    def max_shear(self) -> float:
        r = self.interior_shear_residuals
        return float(np.max(np.abs(r))) if len(r) else 0.0

    def status_label(self) -> str:
        if self.status == "Degenerate" and self.degeneration is not None:
            return f"Degenerate({self.degeneration.reason})"
        return self.status


# ---------------------------------------------------------------- evaluation


def total_volume(cx: IdealComplex, a: AngleAssignment) -> float:
    return float(np.sum(lobachevsky(a.angles)))


def slot_shears(a: AngleAssignment) -> np.ndarray:
    """Shear per angle pair: column k is log(sin x_{k+1} / sin x_{k+2})."""
    s = np.log(np.sin(a.angles))
    return np.roll(s, -1, axis=1) - np.roll(s, -2, axis=1)


def interior_shear_residuals(cx: IdealComplex, a: AngleAssignment) -> np.ndarray:
    sh = slot_shears(a)
    return np.array([sum(sh[t, EDGE_PAIR[s]] for t, s in cx.edge_classes[e].slots) for e in cx.interior_edges])


def constraint_system(cx: IdealComplex, t: AngleTarget) -> tuple[np.ndarray, np.ndarray]:
    """Rows: one per tet (sum = pi), then one per edge class (total = target)."""
    n = cx.num_tets
    tet_rows = np.kron(np.eye(n), np.ones((1, 3)))
    A = np.vstack([tet_rows, slot_matrix(cx)])
    b = np.concatenate([np.full(n, math.pi), t.values])
    return A, b


def volume_grad(x: np.ndarray) -> np.ndarray:
    return -np.log(2.0 * np.sin(x))


def projected_gradient(cx: IdealComplex, t: AngleTarget, a: AngleAssignment, basis: np.ndarray | None = None) -> np.ndarray:
    if basis is None:
        basis = null_space(constraint_system(cx, t)[0])
    return basis.T @ volume_grad(a.flat)


# ---------------------------------------------------------------- feasibility


def feasible_start(cx: IdealComplex, t: AngleTarget, cap: float = math.pi / 3) -> AngleAssignment:
    """Max-min feasible point: maximize s subject to A x = b, x >= s."""
    A, b = constraint_system(cx, t)
    m, nx = A.shape
    # consistency of the equalities alone
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    r = b - A @ sol
    if np.linalg.norm(r) > 1e-9 * max(1.0, np.linalg.norm(b)):
        y = r / np.linalg.norm(r)
        rows = [int(i) for i in np.flatnonzero(np.abs(y) > 1e-9)]
        raise InfeasibleError(
            "edge totals are inconsistent with per-tet sums",
            {"kind": "farkas", "rows": _row_names(cx, rows), "weights": [float(y[i]) for i in rows],
             "combination": float(y @ b)},
        )
    c = np.zeros(nx + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A, np.zeros((m, 1))])
    A_ub = np.hstack([-np.eye(nx), np.ones((nx, 1))])
    bounds = [(0.0, math.pi)] * nx + [(None, cap)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nx), A_eq=A_eq, b_eq=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleError(f"feasibility LP failed: {res.message}", {"kind": "lp", "status": int(res.status)})
    s = float(res.x[-1])
    if s <= 1e-12:
        duals = np.asarray(res.eqlin.marginals)
        rows = [int(i) for i in np.flatnonzero(np.abs(duals) > 1e-9)]
        raise InfeasibleError(
            "no strictly positive angle assignment exists",
            {"kind": "max-min", "min_angle": s, "rows": _row_names(cx, rows), "weights": [float(duals[i]) for i in rows],
             "point": [float(v) for v in res.x[:-1]]},
        )
    x = _centre(A, b, res.x[:-1], s)
    return AngleAssignment.from_flat(x)


def _centre(A, b, x, s, rel: float = 1e-6):
    """Analytic centre of the near-optimal face {A x = b, x >= (1 - rel) s}."""
    Z = null_space(A)
    if Z.shape[1] == 0:
        return x
    lo = (1.0 - rel) * s
    for _ in range(100):
        g = Z.T @ (1.0 / (x - lo) - 1.0 / (math.pi - x))
        H = Z.T @ (Z * (1.0 / (x - lo) ** 2 + 1.0 / (math.pi - x) ** 2)[:, None])
        p = Z @ np.linalg.solve(H, g)
        step = 1.0
        while np.any(x + step * p <= lo) or np.any(x + step * p >= math.pi):
            step *= 0.5
            if step < 1e-12:
                return x
        x = x + step * p
        if float(g @ np.linalg.solve(H, g)) < 1e-20:
            break
    return x


def _row_names(cx: IdealComplex, rows: list[int]) -> list[str]:
    n = cx.num_tets
    return [f"tet {i}" if i < n else f"edge {i - n}" for i in rows]


def random_feasible_point(cx: IdealComplex, t: AngleTarget, rng: np.random.Generator) -> AngleAssignment:
    """A random strictly feasible point: a random chord through the centre."""
    x0 = feasible_start(cx, t).flat
    A, _ = constraint_system(cx, t)
    Z = null_space(A)
    if Z.shape[1] == 0:
        return AngleAssignment.from_flat(x0)
    d = Z @ rng.normal(size=Z.shape[1])
    with np.errstate(divide="ignore"):
        hi = np.where(d < 0, -x0 / d, np.where(d > 0, (math.pi - x0) / d, np.inf))
        lo = np.where(d > 0, -x0 / d, np.where(d < 0, (math.pi - x0) / d, -np.inf))
    tmax, tmin = float(np.min(hi)), float(np.max(lo))
    u = rng.uniform(0.05, 0.95)
    return AngleAssignment.from_flat(x0 + (tmin + u * (tmax - tmin)) * d)


# ---------------------------------------------------------------- Newton


def solve_structure(
    cx: IdealComplex,
    t: AngleTarget,
    opts: SolveOptions | None = None,
    start: AngleAssignment | None = None,
    validate: bool = True,
) -> SolvedStructure:
    opts = opts or SolveOptions()
    if validate:
        rep = validate_theta(cx, t)
        if not rep.ok:
            raise TargetError(rep)
    A, b = constraint_system(cx, t)
    if start is None:
        try:
            start = feasible_start(cx, t)
        except InfeasibleError as err:
            cert = err.certificate
            if cert.get("kind") != "max-min" or cert["min_angle"] < -1e-9:
                raise
            return _closure_only(cx, t, opts, np.array(cert["point"]))
    x = start.flat.copy()
    if np.max(np.abs(A @ x - b)) > 1e-8:
        raise ValueError("starting point does not satisfy the constraints")
    Z = null_space(A)
    guard = opts.min_angle_guard
    lo, hi = guard, math.pi - guard
    x = np.clip(x, lo, hi)
    V = float(np.sum(lobachevsky(x)))
    vols = [V]
    its = [x.copy()] if opts.dump_iterates else []
    status = "IterLimit"
    it = 0
    for it in range(opts.max_iters + 1):
        a = AngleAssignment.from_flat(x)
        g = volume_grad(x)
        gr = Z.T @ g
        shear = interior_shear_residuals(cx, a)
        maxshear = float(np.max(np.abs(shear))) if len(shear) else 0.0
        if np.linalg.norm(gr) <= opts.grad_tol and maxshear <= opts.shear_tol:
            status = "Converged"
            break
        if _near_guard(x, opts):
            status = "Degenerate"
            break
        if it == opts.max_iters or Z.shape[1] == 0:
            break
        cot = 1.0 / np.tan(x)
        Hr = -(Z.T @ (Z * cot[:, None]))
        ev = np.linalg.eigvalsh(Hr)
        if ev[-1] >= 0:
            raise ConcavityError(f"restricted Hessian has eigenvalue {ev[-1]:.3e} >= 0")
        p = Z @ np.linalg.solve(Hr, -gr)
        slope = float(g @ p)
        with np.errstate(divide="ignore", invalid="ignore"):
            room = np.where(p < 0, (lo - x) / p, np.where(p > 0, (hi - x) / p, np.inf))
        amax = float(np.min(room))
        alpha = 1.0 if amax > 1.0 else opts.boundary_fraction * amax
        if amax <= 1.0 and alpha < 1e-300:
            status = "Degenerate"
            break
        while True:
            xn = x + alpha * p
            Vn = float(np.sum(lobachevsky(xn)))
            if Vn >= V + opts.armijo * alpha * slope or alpha < 1e-14:
                break
            alpha *= opts.backtrack
        if Vn < V:
            # line search stalled at rounding level
            if Vn < V - 1e-13 * max(1.0, abs(V)):
                break
            xn, Vn = x, V
        x = np.clip(xn, lo, hi)
        V = Vn
        vols.append(V)
        if opts.dump_iterates:
            its.append(x.copy())
        if np.array_equal(xn, x) and alpha < 1e-14:
            break
    a = AngleAssignment.from_flat(x)
    sol = SolvedStructure(
        assignment=a,
        volume=V,
        interior_shear_residuals=interior_shear_residuals(cx, a),
        gradient_norm=float(np.linalg.norm(Z.T @ volume_grad(x))),
        status=status,
        iterations=it,
        volumes=vols,
        iterates=its,
    )
    if status == "Degenerate":
        sol.degeneration = classify_degeneration(cx, t, a, opts)
    return sol


def _closure_only(cx, t, opts, x) -> SolvedStructure:
    """Targets whose angle structures all lie on the boundary of the cube."""
    x = np.clip(x, 0.0, math.pi) + 0.0  # drop signed zeros
    a = AngleAssignment.from_flat(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        shear = interior_shear_residuals(cx, a)
        grad = float("nan")
    return SolvedStructure(
        assignment=a,
        volume=float(np.sum(lobachevsky(x))),
        interior_shear_residuals=shear,
        gradient_norm=grad,
        status="Degenerate",
        iterations=0,
        degeneration=classify_degeneration(cx, t, a, opts),
    )


def _near_guard(x: np.ndarray, opts: SolveOptions) -> bool:
    g = opts.min_angle_guard + opts.degenerate_margin
    return bool(np.min(x) < g or np.max(x) > math.pi - g)


def classify_degeneration(cx: IdealComplex, t: AngleTarget, a: AngleAssignment, opts: SolveOptions) -> Degeneration:
    """Circuit sums first (c), then boundary angles at 0 or pi (b), else a collapsing simplex (a)."""
    g = opts.min_angle_guard + opts.degenerate_margin
    slots = [(int(q) // 3, int(q) % 3) for q in np.flatnonzero(a.flat < g)]
    ext = t.exterior(cx)
    circuits, _ = enumerate_circuits(cx.boundary, opts.circuit_max_len)
    best = None
    for c in circuits:
        if c.elementary or c.contractible == "unknown":
            continue
        s = float(sum(ext[e] for e in c.edges))
        if s <= 2 * math.pi + opts.circuit_tol and (best is None or s < best[1]):
            best = (c, s)
    if best is not None:
        c, s = best
        return Degeneration("c", f"circuit of {len(c)} boundary edges has exterior sum {s!r}", c, s, slots)
    for q, e in enumerate(cx.boundary_edge_ids):
        if e in t.flat:
            continue
        w = ext[q]
        if w < opts.circuit_tol or w > math.pi - opts.circuit_tol:
            return Degeneration("b", f"boundary edge {e} has exterior angle {w!r}", slots=slots)
    return Degeneration("a", f"{len(slots)} simplex angles collapsed", slots=slots)


# ---------------------------------------------------------------- sensitivity


def constraint_multipliers(cx: IdealComplex, t: AngleTarget, a: AngleAssignment) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares multipliers with A^T lam = grad V; returns (tet part, edge part)."""
    A, _ = constraint_system(cx, t)
    lam, *_ = np.linalg.lstsq(A.T, volume_grad(a.flat), rcond=None)
    n = cx.num_tets
    return lam[:n], lam[n:]
