"""Finite linear programs for isoperimetric lower bounds.

The programs minimize a scalar area variable A over nonnegative variables
(A, mu_1, ..., mu_K), where mu_k is the mass placed on a candidate chord
atom (ell_i, alpha_j, beta_k).  Constraints say that the atom masses, viewed
as a chord measure, are compatible with boundary area A and enclosed volume
V; minimizing A then gives a lower bound for the area of any region of
volume V, and the model ball should be optimal.

All rows are written as row . x >= rhs.  The solver wraps scipy's HiGHS
interface; feasibility, duality gap and complementary slackness are
re-checked here independently of the solver's own report.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .chordmeasure import gauss_legendre
from .spaceform import (
    BallGeometry,
    ModelParams,
    ball_from_volume,
    candle,
    candle_anti,
    candle_anti2,
    chord_T_inverse,
    delta_weight,
    sphere_volume,
)

__all__ = [
    "LinearProgram",
    "LPSolution",
    "WeakDualityReport",
    "GridSpec",
    "solve",
    "verify_weak_duality",
    "build_isoperimetric_lp",
    "build_relative_lp",
    "product_family",
    "diagonal_profile_integral",
    "lp_to_text",
    "solution_to_json",
]


@dataclass(frozen=True)
class LinearProgram:
    """min objective . x  subject to  row_matrix . x >= rhs,  x >= 0."""

    objective: np.ndarray
    row_matrix: np.ndarray
    rhs: np.ndarray
    row_labels: tuple[str, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "objective", np.asarray(self.objective, dtype=float))
        object.__setattr__(self, "row_matrix", np.asarray(self.row_matrix, dtype=float))
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float))
        m, n = self.row_matrix.shape
        if self.objective.shape != (n,):
            raise ValueError(f"objective length {self.objective.shape} does not match {n} variables")
        if self.rhs.shape != (m,):
            raise ValueError(f"rhs length {self.rhs.shape} does not match {m} rows")
        if len(self.row_labels) != m:
            raise ValueError(f"{len(self.row_labels)} labels for {m} rows")

    @property
    def n_vars(self) -> int:
        return self.row_matrix.shape[1]

    @property
    def n_rows(self) -> int:
        return self.row_matrix.shape[0]


@dataclass
class LPSolution:
    """Solver output plus independently recomputed residuals."""

    status: str  # optimal | infeasible | unbounded | tolerance-failure
    primal: np.ndarray | None
    dual: np.ndarray | None
    objective_value: float | None
    primal_residual: float
    dual_residual: float
    duality_gap: float
    cs_residual: float
    solver_message: str = ""


@dataclass
class WeakDualityReport:
    primal_objective: float
    dual_objective: float
    gap: float
    primal_violation: float
    dual_violation: float

    def certifies(self, tol: float) -> bool:
        return (
            self.primal_violation <= tol
            and self.dual_violation <= tol
            and abs(self.gap) <= tol
        )


def _residuals(lp: LinearProgram, x: np.ndarray, y: np.ndarray):
    slack = lp.row_matrix @ x - lp.rhs
    primal_res = max(float(np.max(-slack, initial=0.0)), float(np.max(-x, initial=0.0)))
    reduced = lp.objective - lp.row_matrix.T @ y
    dual_res = max(float(np.max(-reduced, initial=0.0)), float(np.max(-y, initial=0.0)))
    gap = float(lp.objective @ x - lp.rhs @ y)
    cs = max(
        float(np.max(np.abs(y * slack), initial=0.0)),
        float(np.max(np.abs(x * reduced), initial=0.0)),
    )
    return primal_res, dual_res, gap, cs


def solve(lp: LinearProgram, tol: float = 1e-7) -> LPSolution:
    """Solve the LP; statuses: optimal, infeasible, unbounded, tolerance-failure.

    tol bounds the accepted feasibility/stationarity residuals, each taken
    relative to the magnitude of the arithmetic that produced it.  The
    default matches the solver's own accuracy contract; the solver is asked
    for at least that accuracy.
    """
    if not (0.0 < tol <= 1e-3):
        raise ValueError(f"tol must lie in (0, 1e-3], got {tol!r}")
    solver_tol = min(tol, 1e-7)
    res = linprog(
        c=lp.objective,
        A_ub=-lp.row_matrix,
        b_ub=-lp.rhs,
        bounds=(0.0, None),
        method="highs",
        options={
            "primal_feasibility_tolerance": solver_tol,
            "dual_feasibility_tolerance": solver_tol,
        },
    )
    if res.status == 2:
        return LPSolution("infeasible", None, None, None, math.inf, math.inf, math.inf, math.inf, res.message)
    if res.status == 3:
        return LPSolution("unbounded", None, None, None, math.inf, math.inf, math.inf, math.inf, res.message)
    if res.status != 0:
        return LPSolution("tolerance-failure", None, None, None, math.inf, math.inf, math.inf, math.inf, res.message)

    x = np.asarray(res.x, dtype=float)
    y = -np.asarray(res.ineqlin.marginals, dtype=float)
    primal_res, dual_res, gap, cs = _residuals(lp, x, y)
    # each residual is judged against the magnitude of the arithmetic that
    # produced it; the rhs alone undersells rows whose matrix entries are large
    abs_matrix = np.abs(lp.row_matrix)
    primal_scale = 1.0 + float(np.max(np.abs(lp.rhs), initial=0.0)) + float(
        np.max(abs_matrix @ np.abs(x), initial=0.0)
    )
    dual_scale = 1.0 + float(np.max(np.abs(lp.objective), initial=0.0)) + float(
        np.max(abs_matrix.T @ np.abs(y), initial=0.0)
    )
    gap_scale = 1.0 + abs(float(lp.objective @ x)) + abs(float(lp.rhs @ y))
    ok = (
        primal_res <= tol * primal_scale
        and dual_res <= tol * dual_scale
        and abs(gap) <= tol * gap_scale
        and cs <= tol * max(primal_scale, dual_scale)
    )
    return LPSolution(
        "optimal" if ok else "tolerance-failure",
        x,
        y,
        float(res.fun),
        primal_res,
        dual_res,
        gap,
        cs,
        res.message,
    )


def verify_weak_duality(lp: LinearProgram, primal: np.ndarray, dual: np.ndarray) -> WeakDualityReport:
    """Independent arithmetic check of a primal/dual pair (no solver involved)."""
    primal = np.asarray(primal, dtype=float)
    dual = np.asarray(dual, dtype=float)
    if primal.shape != (lp.n_vars,):
        raise ValueError(f"primal has shape {primal.shape}, expected ({lp.n_vars},)")
    if dual.shape != (lp.n_rows,):
        raise ValueError(f"dual has shape {dual.shape}, expected ({lp.n_rows},)")
    primal_res, dual_res, gap, _ = _residuals(lp, primal, dual)
    return WeakDualityReport(
        primal_objective=float(lp.objective @ primal),
        dual_objective=float(lp.rhs @ dual),
        gap=gap,
        primal_violation=primal_res,
        dual_violation=dual_res,
    )


@dataclass(frozen=True)
class GridSpec:
    """Atom grid: n_ell chord lengths x n_alpha x n_alpha boundary angles.

    With align_curve the ell list includes the image of each angle node under
    the ball's chord curve (these atoms let the discrete program reproduce
    the ball measure), padded by uniform nodes up to n_ell.
    """

    n_ell: int = 40
    n_alpha: int = 20
    align_curve: bool = True

    def __post_init__(self) -> None:
        if self.n_alpha < 2:
            raise ValueError("need at least 2 angle nodes")
        if self.n_ell < (self.n_alpha if self.align_curve else 2):
            raise ValueError("n_ell must cover at least the curve nodes")

    def refined(self) -> "GridSpec":
        return GridSpec(2 * self.n_ell, 2 * self.n_alpha, self.align_curve)


def product_family(gammas=(0.5, 1.0, 1.5, 2.0)):
    """Test functions f(alpha, beta) = (cos a cos b)^gamma, all in the admissible cone."""
    fam = []
    for g in gammas:
        def f(alpha, beta, _g=g):
            return (np.cos(alpha) * np.cos(beta)) ** _g
        fam.append((f"pow{g:g}", f))
    return fam


def diagonal_profile_integral(f, n: int, n_nodes: int = 200) -> float:
    """integral over [0, pi/2] of f(alpha, alpha) * delta_weight(n, alpha)."""
    alpha, w = gauss_legendre(0.0, math.pi / 2.0, n_nodes)
    return float(np.dot(w, np.asarray(f(alpha, alpha)) * delta_weight(n, alpha)))


def _grid_atoms(params: ModelParams, r_curve: float, grid: GridSpec):
    """Angle nodes, ell nodes (curve-aligned), and the flattened atom table."""
    m = grid.n_alpha
    alpha = (np.arange(1, m + 1) / (m + 1)) * (math.pi / 2.0)
    lmax = 2.0 * r_curve
    if params.kappa > 0.0:
        lmax = min(lmax, math.pi / math.sqrt(params.kappa))
    nodes = []
    if grid.align_curve:
        nodes.append(np.asarray(chord_T_inverse(params.kappa, r_curve, np.cos(alpha))))
    n_fill = grid.n_ell - (len(nodes[0]) if nodes else 0)
    if n_fill > 0:
        nodes.append((np.arange(1, n_fill + 1) / (n_fill + 1)) * lmax)
    ell = np.unique(np.concatenate(nodes))
    L, A_, B_ = np.meshgrid(ell, alpha, alpha, indexing="ij")
    return alpha, ell, L.ravel(), A_.ravel(), B_.ravel()


def _assemble(
    params: ModelParams,
    V: float,
    area_coeff: float,
    vol_coeff: float,
    rhs_c: float,
    rhs_d: float,
    f_rhs_scale: float,
    r_curve: float,
    grid: GridSpec,
    f_family,
    meta: dict,
) -> LinearProgram:
    alpha, ell, L, A_, B_ = _grid_atoms(params, r_curve, grid)
    sec_a = 1.0 / np.cos(A_)
    sec_b = 1.0 / np.cos(B_)
    f1 = candle(params, L) * sec_a * sec_b
    f2 = candle_anti(params, L) / 2.0 * (sec_a + sec_b)
    f3 = candle_anti2(params, L)

    n_atoms = L.size
    rows = []
    rhs = []
    labels = []

    def add_row(area_c, atom_vals, rhs_val, label):
        row = np.empty(1 + n_atoms)
        row[0] = area_c
        row[1:] = atom_vals
        rows.append(row)
        rhs.append(rhs_val)
        labels.append(label)

    add_row(area_coeff, -f1, 0.0, "area-vs-F1")
    add_row(vol_coeff, -f2, 0.0, "volume-vs-F2")
    add_row(0.0, -f3, rhs_c, "F3-cap")
    add_row(0.0, L, rhs_d, "total-length")
    for name, f in f_family:
        vals = np.asarray(f(A_, B_), dtype=float)
        add_row(0.0, -vals, -f_rhs_scale * diagonal_profile_integral(f, params.n), f"profile-{name}")

    objective = np.zeros(1 + n_atoms)
    objective[0] = 1.0
    meta = dict(meta)
    meta.update(
        {
            "alpha_nodes": alpha,
            "ell_nodes": ell,
            "atoms": (L, A_, B_),
            "volume": V,
        }
    )
    return LinearProgram(objective, np.vstack(rows), np.asarray(rhs), tuple(labels), meta)


def build_isoperimetric_lp(
    params: ModelParams, V: float, grid: GridSpec, f_family
) -> LinearProgram:
    """LP whose optimum should match the area of the model ball of volume V.

    Variables: A followed by one mass per atom.  Rows:
      A*area_B  >= integral F1      (boundary-boundary visibility)
      A*V       >= integral F2      (boundary-interior visibility)
      V^2       >= integral F3      (interior-interior visibility)
      integral ell >= omega_{n-1} V (total chord length)
      integral f <= area_B * diagonal profile of f, per admissible f
    """
    ball = ball_from_volume(params, V)
    omega = sphere_volume(params.n - 1)
    return _assemble(
        params,
        V,
        area_coeff=ball.area,
        vol_coeff=V,
        rhs_c=-V * V,
        rhs_d=omega * V,
        f_rhs_scale=ball.area,
        r_curve=ball.radius,
        grid=grid,
        f_family=f_family,
        meta={"kind": "isoperimetric", "ball": ball, "params": params},
    )


def build_relative_lp(
    params: ModelParams,
    V: float,
    m: int,
    grid: GridSpec,
    f_family,
    variant: str = "rescaled",
) -> LinearProgram:
    """Quotient (multiplicity m) version of the isoperimetric LP.

    The reference object is the ball B0 of volume m*V divided by a free
    m-fold symmetry; its boundary-area share is area(B0)/m and its chord
    measure is the ball's scaled by 1/m.  variant="rescaled" uses the row
    scaling under which that object is feasible with equality everywhere
    (rhs m*V^2 on the F3 row, omega_{n-1}*V on the length row);
    variant="printed" keeps the alternative printed scaling
    (omega_{n-1}*m*V^2 and bare V) for comparison.
    """
    if m < 1:
        raise ValueError(f"multiplicity must be >= 1, got {m}")
    if variant not in ("rescaled", "printed"):
        raise ValueError(f"variant must be 'rescaled' or 'printed', got {variant!r}")
    ball0 = ball_from_volume(params, m * V)
    omega = sphere_volume(params.n - 1)
    a_rel = ball0.area / m
    if variant == "rescaled":
        rhs_c = -m * V * V
        rhs_d = omega * V
    else:
        rhs_c = -omega * m * V * V
        rhs_d = V
    return _assemble(
        params,
        V,
        area_coeff=m * a_rel,
        vol_coeff=m * V,
        rhs_c=rhs_c,
        rhs_d=rhs_d,
        f_rhs_scale=a_rel,
        r_curve=ball0.radius,
        grid=grid,
        f_family=f_family,
        meta={
            "kind": "relative",
            "ball0": ball0,
            "params": params,
            "m": m,
            "variant": variant,
            "relative_area": a_rel,
        },
    )


def lp_to_text(lp: LinearProgram) -> str:
    """Plain text dump: objective, then one line per row 'label, coeffs, >=, rhs'."""
    lines = [f"minimize {' '.join(repr(c) for c in lp.objective)}"]
    for label, row, rhs in zip(lp.row_labels, lp.row_matrix, lp.rhs):
        coeffs = " ".join(repr(float(c)) for c in row)
        lines.append(f"{label}, {coeffs}, >=, {rhs!r}")
    lines.append("bounds x >= 0")
    return "\n".join(lines) + "\n"


def solution_to_json(sol: LPSolution) -> str:
    payload = {
        "schema": 1,
        "status": sol.status,
        "objective_value": sol.objective_value,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "duality_gap": sol.duality_gap,
        "cs_residual": sol.cs_residual,
        "dual": None if sol.dual is None else sol.dual.tolist(),
    }
    return json.dumps(payload, sort_keys=True)
