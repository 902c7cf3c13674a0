"""Polynomial lemmas behind the n=4 certificates.

After the half-angle substitution t = tan(ell/2) (curved up) or
t = tanh(ell/2) (curved down), with p = 1/(3 tan(r) cos(alpha)) and
q likewise in beta, the certificate's sup integrand becomes an explicit
function G(t, p, q) built from a table of rational functions S_i(t), and
admissibility of the induced f reduces to global nonnegativity of

    H(t, p, q) = G(1/(3p), p, p) + G(1/(3q), q, q) - 2 G(t, p, q),

which vanishes exactly on the curve {p = q, 3pt = 1}.  This module holds
the S table, G and H, the quartic factorization used by the
positive-curvature argument, closed-form gradient numerators of H (a
3-polynomial critical system), a seeded multistart Newton search for its
roots, and a dense grid plus escape-ray verification that H >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "CASES",
    "LemmaVars",
    "PolySystem",
    "CriticalPoint",
    "CriticalSearchResult",
    "HNonnegReport",
    "RayCheck",
    "S_table",
    "G",
    "G_diag_peak",
    "H",
    "dG_dt",
    "check_factorization",
    "hyperbolic_slope_sign_matches",
    "dGdp_identity",
    "DGdpCheck",
    "critical_system",
    "solve_critical_points",
    "verify_H_nonneg",
    "slice_max_t",
    "curve_distance",
    "default_grid_ranges",
]

CASES = ("spherical", "hyperbolic")


def _check_case(case: str) -> None:
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")


@dataclass(frozen=True)
class LemmaVars:
    """A point in the substituted coordinates, domain-checked per case."""

    case: str
    t: float
    p: float
    q: float

    def __post_init__(self) -> None:
        _check_case(self.case)
        if self.case == "hyperbolic":
            if not (0.0 <= self.t < 1.0):
                raise ValueError(f"hyperbolic t must lie in [0, 1), got {self.t}")
            if self.p < 1.0 / 3.0 or self.q < 1.0 / 3.0:
                raise ValueError("hyperbolic p, q must be >= 1/3")
        else:
            if self.t < 0.0:
                raise ValueError(f"spherical t must be >= 0, got {self.t}")
            if self.p <= 0.0 or self.q <= 0.0:
                raise ValueError("p, q must be positive")


def S_table(case: str, t):
    """Rational/arc functions (S1, S0, Sm1, Sm2): derivative ladder of the
    n=4 candle under the half-angle substitution (S_i'(t) = S_{i+1} times
    the substitution factor)."""
    _check_case(case)
    t = np.asarray(t, dtype=float)
    if case == "spherical":
        den = (1.0 + t * t) ** 3
        s1 = 12.0 * t ** 2 * (1.0 - t * t) / den
        s0 = 8.0 * t ** 3 / den
        sm1 = (4.0 / 3.0) * t ** 4 * (3.0 + t * t) / den
        sm2 = (4.0 / 3.0) * np.arctan(t) - (8.0 / 9.0) * t ** 3 / den - (4.0 / 3.0) * t / (1.0 + t * t)
    else:
        if np.any(t >= 1.0) or np.any(t < 0.0):
            raise ValueError("hyperbolic t must lie in [0, 1)")
        den = (1.0 - t * t) ** 3
        s1 = 12.0 * t ** 2 * (1.0 + t * t) / den
        s0 = 8.0 * t ** 3 / den
        sm1 = (4.0 / 3.0) * t ** 4 * (3.0 - t * t) / den
        sm2 = (4.0 / 3.0) * np.arctanh(t) + (8.0 / 9.0) * t ** 3 / den - (4.0 / 3.0) * t / (1.0 - t * t)
    return s1, s0, sm1, sm2


def G(case: str, t, p, q):
    """Substituted sup integrand (coefficients absorb the 9 tan^2 r scale)."""
    _check_case(case)
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _, s0, sm1, sm2 = S_table(case, t)
    if case == "spherical":
        return (8.0 / 3.0) * np.arctan(t) - p * q * s0 - (p + q) * sm1 - sm2
    return (8.0 / 3.0) * np.arctanh(t) - p * q * s0 + (p + q) * sm1 - sm2


def G_diag_peak(case: str, p):
    """G evaluated on the curve point of the diagonal slice: G(1/(3p), p, p).

    Uses the collapsed closed form (4/3) arctan(1/3p) + (4/3) p/(9p^2 + 1)
    (arctanh and 9p^2 - 1 in the hyperbolic case).  The naive route through
    S_table cancels catastrophically as p approaches 1/3 in the hyperbolic
    case, where the 1/(1-t^2)^3 pole meets a vanishing coefficient; the
    collapsed form is exact on the whole domain.
    """
    p = np.asarray(p, dtype=float)
    _check_case(case)
    if case == "spherical":
        return (4.0 / 3.0) * np.arctan(1.0 / (3.0 * p)) + (4.0 / 3.0) * p / (9.0 * p * p + 1.0)
    return (4.0 / 3.0) * np.arctanh(1.0 / (3.0 * p)) + (4.0 / 3.0) * p / (9.0 * p * p - 1.0)


def H(case: str, t, p, q):
    """Admissibility defect; zero exactly on {p = q, 3pt = 1}, claimed >= 0."""
    return G_diag_peak(case, p) + G_diag_peak(case, q) - 2.0 * G(case, t, p, q)


def dG_dt(case: str, t, p, q):
    """Closed-form t-derivative of G."""
    _check_case(case)
    t = np.asarray(t, dtype=float)
    if case == "spherical":
        num = 12.0 * p * q * t ** 4 - 8.0 * (p + q) * t ** 3 + (4.0 - 12.0 * p * q) * t ** 2 + 4.0 / 3.0
        return 2.0 * num / (1.0 + t * t) ** 4
    num = 9.0 * p * q * t ** 4 - 6.0 * (p + q) * t ** 3 + (3.0 + 9.0 * p * q) * t ** 2 - 1.0
    return -(8.0 / 3.0) * num / (1.0 - t * t) ** 4


def check_factorization(p, t, relative: bool = False):
    """Residual of the quartic factorization used in the positive-curvature case:

    12 p^2 t^4 - 16 p t^3 + (4 - 12 p^2) t^2 + 4/3
        = 4 (3 p t - 1) (p t^3 - t^2 - p t - 1/3).

    With relative=True the residual is divided by 1 + |rhs|, so rounding
    noise stays bounded independently of how large the quartic grows.
    """
    p = np.asarray(p, dtype=float)
    t = np.asarray(t, dtype=float)
    lhs = 12.0 * p ** 2 * t ** 4 - 16.0 * p * t ** 3 + (4.0 - 12.0 * p ** 2) * t ** 2 + 4.0 / 3.0
    rhs = 4.0 * (3.0 * p * t - 1.0) * (p * t ** 3 - t ** 2 - p * t - 1.0 / 3.0)
    resid = lhs - rhs
    if relative:
        return resid / (1.0 + np.abs(rhs))
    return resid


def hyperbolic_slope_sign_matches(t, p) -> np.ndarray:
    """True where sign dG/dt(t,p,p) == sign (1 - 3pt) * (p t^3 - t^2 + p t + 1/3)."""
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    lhs = dG_dt("hyperbolic", t, p, p)
    rhs = (1.0 - 3.0 * p * t) * (p * t ** 3 - t ** 2 + p * t + 1.0 / 3.0)
    return np.sign(lhs) == np.sign(rhs)


@dataclass(frozen=True)
class DGdpCheck:
    """Finite-difference vs closed-form derivative of the diagonal peak value."""

    p: float
    closed: float
    fd: float

    @property
    def residual(self) -> float:
        return self.fd - self.closed


def dGdp_identity(p: float) -> DGdpCheck:
    """d/dp of [G(1/(3p), p, p) + (8/3) p - 2 pi/3] (spherical case).

    Closed form 216 p^4 / (9 p^2 + 1)^2, cross-checked by a central
    difference of the defining expression.
    """
    if p <= 0.0:
        raise ValueError(f"p must be positive, got {p}")
    closed = 216.0 * p ** 4 / (9.0 * p ** 2 + 1.0) ** 2

    def psi(x: float) -> float:
        return float(G_diag_peak("spherical", x)) + (8.0 / 3.0) * x - 2.0 * math.pi / 3.0

    h = 1e-5 * max(1.0, p)
    fd = (psi(p + h) - psi(p - h)) / (2.0 * h)
    return DGdpCheck(p=p, closed=closed, fd=fd)


# ---------------------------------------------------------------------------
# critical system: gradient numerators of H as coefficient maps
# keys are exponent triples (i, j, k) for t^i p^j q^k


def _swap_pq(poly: dict) -> dict:
    return {(i, k, j): c for (i, j, k), c in poly.items()}


_ET_SPH = {(4, 1, 1): 9.0, (3, 1, 0): -6.0, (3, 0, 1): -6.0, (2, 0, 0): 3.0, (2, 1, 1): -9.0, (0, 0, 0): 1.0}
_EP_SPH = {
    (6, 4, 0): 81.0,
    (4, 4, 0): 243.0,
    (3, 4, 1): 486.0,
    (3, 2, 1): 108.0,
    (3, 0, 1): 6.0,
    (2, 2, 0): -54.0,
    (2, 0, 0): -3.0,
    (0, 2, 0): -18.0,
    (0, 0, 0): -1.0,
}
_ET_HYP = {(4, 1, 1): 9.0, (3, 1, 0): -6.0, (3, 0, 1): -6.0, (2, 0, 0): 3.0, (2, 1, 1): 9.0, (0, 0, 0): -1.0}
_EP_HYP = {
    (6, 4, 0): 81.0,
    (4, 4, 0): -243.0,
    (3, 4, 1): 486.0,
    (3, 2, 1): -108.0,
    (3, 0, 1): 6.0,
    (2, 2, 0): 54.0,
    (2, 0, 0): -3.0,
    (0, 2, 0): -18.0,
    (0, 0, 0): 1.0,
}


def _poly_eval(poly: dict, t, p, q):
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    out = np.zeros(np.broadcast(t, p, q).shape)
    for (i, j, k), c in poly.items():
        out = out + c * t ** i * p ** j * q ** k
    return out


def _poly_diff(poly: dict, var: int) -> dict:
    out: dict = {}
    for exps, c in poly.items():
        e = exps[var]
        if e == 0:
            continue
        new = list(exps)
        new[var] = e - 1
        key = tuple(new)
        out[key] = out.get(key, 0.0) + c * e
    return out


def _poly_abs_eval(poly: dict, t, p, q) -> float:
    return float(sum(abs(c) * abs(t) ** i * abs(p) ** j * abs(q) ** k for (i, j, k), c in poly.items()))


@dataclass(frozen=True)
class PolySystem:
    """Gradient numerators of H: three polynomials in (t, p, q) with search box."""

    case: str
    polys: tuple[dict, ...]
    variables: tuple[str, ...]
    box: tuple[tuple[float, float], ...]
    _jacobian: tuple[tuple[dict, ...], ...] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        jac = tuple(tuple(_poly_diff(p, v) for v in range(3)) for p in self.polys)
        object.__setattr__(self, "_jacobian", jac)

    def eval(self, t, p, q) -> np.ndarray:
        return np.stack([_poly_eval(poly, t, p, q) for poly in self.polys])

    def jacobian(self, t, p, q) -> np.ndarray:
        return np.array([[_poly_eval(d, t, p, q) for d in row] for row in self._jacobian])

    def scale(self, t: float, p: float, q: float) -> np.ndarray:
        return np.array([1.0 + _poly_abs_eval(poly, t, p, q) for poly in self.polys])

    def gradient_of_H(self, t, p, q) -> tuple:
        """Rebuild (dH/dt, dH/dp, dH/dq) from the numerators (for FD cross-checks)."""
        t = np.asarray(t, dtype=float)
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        et, ep, eq = (
            _poly_eval(self.polys[0], t, p, q),
            _poly_eval(self.polys[1], t, p, q),
            _poly_eval(self.polys[2], t, p, q),
        )
        if self.case == "spherical":
            dt = -(16.0 / 3.0) * et / (1.0 + t * t) ** 4
            dp = (8.0 / 3.0) * ep / ((9.0 * p * p + 1.0) ** 2 * (1.0 + t * t) ** 3)
            dq = (8.0 / 3.0) * eq / ((9.0 * q * q + 1.0) ** 2 * (1.0 + t * t) ** 3)
        else:
            dt = (16.0 / 3.0) * et / (1.0 - t * t) ** 4
            dp = (8.0 / 3.0) * ep / ((9.0 * p * p - 1.0) ** 2 * (1.0 - t * t) ** 3)
            dq = (8.0 / 3.0) * eq / ((9.0 * q * q - 1.0) ** 2 * (1.0 - t * t) ** 3)
        return dt, dp, dq


def critical_system(case: str) -> PolySystem:
    """Numerators of grad H; common positive factors and denominators cleared."""
    _check_case(case)
    if case == "spherical":
        return PolySystem(
            case,
            (dict(_ET_SPH), dict(_EP_SPH), _swap_pq(_EP_SPH)),
            ("t", "p", "q"),
            ((0.01, 5.0), (0.05, 10.0), (0.05, 10.0)),
        )
    return PolySystem(
        case,
        (dict(_ET_HYP), dict(_EP_HYP), _swap_pq(_EP_HYP)),
        ("t", "p", "q"),
        ((0.01, 0.99), (1.0 / 3.0, 10.0), (1.0 / 3.0, 10.0)),
    )


def curve_distance(t: float, p: float, q: float) -> float:
    """Euclidean distance from (t,p,q) to the curve {(1/(3s), s, s) : s > 0}."""

    def d2(s: float) -> float:
        return (t - 1.0 / (3.0 * s)) ** 2 + (p - s) ** 2 + (q - s) ** 2

    res = minimize_scalar(d2, bounds=(1e-8, 1e8), method="bounded", options={"xatol": 1e-13})
    return math.sqrt(float(res.fun))


@dataclass(frozen=True)
class CriticalPoint:
    t: float
    p: float
    q: float
    residual: float
    curve_distance: float
    n_merged: int


@dataclass
class CriticalSearchResult:
    """Sequence of clustered roots plus bookkeeping about the multistart."""

    roots: list
    n_starts: int
    n_converged: int
    n_singular: int
    n_stalled: int
    n_out_of_domain: int
    n_degenerate: int = 0

    def __iter__(self):
        return iter(self.roots)

    def __len__(self) -> int:
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]


def solve_critical_points(
    system: PolySystem, box=None, n_starts: int = 1000, seed: int = 0
) -> CriticalSearchResult:
    """Deterministic multistart damped Newton on the 3-polynomial system.

    Starts are Philox(seed) uniform in the box.  Singular Jacobians fall
    back to a Levenberg step; starts that still fail are discarded and
    counted.  Converged roots are filtered to the case domain, clustered
    with radius 1e-6, and annotated with their distance to the curve
    {p=q, 3pt=1}.
    """
    box = tuple(box) if box is not None else system.box
    lows = np.array([b[0] for b in box])
    highs = np.array([b[1] for b in box])
    rng = np.random.Generator(np.random.Philox(key=seed))
    starts = lows + rng.random((n_starts, 3)) * (highs - lows)

    converged = []
    n_singular = 0
    n_stalled = 0
    for x0 in starts:
        x = x0.copy()
        ok = False
        singular = False
        for _ in range(120):
            F = system.eval(*x)
            scale = system.scale(*x)
            if np.max(np.abs(F) / scale) < 1e-13:
                ok = True
                break
            J = system.jacobian(*x)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                JtJ = J.T @ J
                lam = 1e-8 * (np.trace(JtJ) / 3.0 + 1.0)
                try:
                    step = np.linalg.solve(JtJ + lam * np.eye(3), -J.T @ F)
                except np.linalg.LinAlgError:
                    singular = True
                    break
            nF = np.linalg.norm(F / scale)
            lam_step = 1.0
            accepted = False
            while lam_step >= 1.0 / 4096.0:
                xn = x + lam_step * step
                Fn = system.eval(*xn)
                if np.linalg.norm(Fn / system.scale(*xn)) < nF:
                    x = xn
                    accepted = True
                    break
                lam_step *= 0.5
            if not accepted:
                break
        if ok:
            converged.append(x)
        elif singular:
            n_singular += 1
        else:
            n_stalled += 1

    n_out = 0
    n_degenerate = 0
    kept = []
    for x in converged:
        t, p, q = (float(v) for v in x)
        in_domain = t > 1e-8 and p > 1e-8 and q > 1e-8
        if system.case == "hyperbolic":
            # open domain t in (0,1), p,q in (1/3, inf)
            in_domain = in_domain and t < 1.0 - 1e-10 and p > 1.0 / 3.0 and q > 1.0 / 3.0
        if not in_domain:
            n_out += 1
            continue
        # The deflated polynomials have higher-order zeros on the closure of
        # the domain (hyperbolic corner t=1, p=q=1/3) where a whole blob of
        # points evaluates below machine precision without being critical
        # points of anything.  A genuine root sits on the 1-d curve of
        # minimizers, so the Jacobian has rank exactly 2 there; an isolated
        # off-curve root would have rank 3.  Rank < 2 means the "root" came
        # from the degenerate closure and cannot be certified.
        sv = np.linalg.svd(system.jacobian(t, p, q), compute_uv=False)
        if sv[1] <= 1e-6 * max(sv[0], float(np.max(system.scale(t, p, q)))):
            n_degenerate += 1
            continue
        kept.append((t, p, q))

    kept.sort()
    clusters: list[list] = []
    for pt in kept:
        for cl in clusters:
            if math.dist(pt, cl[0]) <= 1e-6:
                cl.append(pt)
                break
        else:
            clusters.append([pt])

    roots = []
    for cl in clusters:
        t, p, q = cl[0]
        res = float(np.max(np.abs(system.eval(t, p, q) / system.scale(t, p, q))))
        roots.append(CriticalPoint(t, p, q, res, curve_distance(t, p, q), len(cl)))
    return CriticalSearchResult(
        roots=roots,
        n_starts=n_starts,
        n_converged=len(converged),
        n_singular=n_singular,
        n_stalled=n_stalled,
        n_out_of_domain=n_out,
        n_degenerate=n_degenerate,
    )


# ---------------------------------------------------------------------------
# dense-grid nonnegativity with escape rays


def default_grid_ranges(case: str) -> tuple[tuple[float, float], ...]:
    if case == "spherical":
        return ((0.02, 4.0), (0.05, 6.0), (0.05, 6.0))
    return ((0.01, 0.99), (0.35, 6.0), (0.35, 6.0))


@dataclass(frozen=True)
class RayCheck:
    label: str
    tail_min: float
    passed: bool


@dataclass
class HNonnegReport:
    case: str
    min_value: float
    argmin: tuple[float, float, float]
    argmin_curve_distance: float
    grid_shape: tuple[int, int, int]
    rays: tuple[RayCheck, ...]

    @property
    def rays_ok(self) -> bool:
        return all(r.passed for r in self.rays)

    @property
    def passed(self) -> bool:
        return self.min_value >= -1e-9 and self.rays_ok

    def __iter__(self):
        yield self.min_value
        yield self.argmin


def _ray_family(case: str):
    k = np.arange(40, dtype=float)
    if case == "spherical":
        small = 0.02 * 10.0 ** (-k / 5.0)
        big = 4.0 * 10.0 ** (k / 6.0)
        return (
            ("t->0", small, np.full_like(k, 1.0), np.full_like(k, 2.0)),
            ("t->inf", big, np.full_like(k, 1.0), np.full_like(k, 2.0)),
            ("p->0", np.full_like(k, 0.5), small, np.full_like(k, 1.0)),
            ("p->inf", np.full_like(k, 0.5), big, np.full_like(k, 1.0)),
            ("q->0", np.full_like(k, 0.5), np.full_like(k, 1.0), small),
            ("q->inf", np.full_like(k, 0.5), np.full_like(k, 1.0), big),
            ("curve p=q->inf", 1.0 / (3.0 * big), big, big),
            ("joint t->inf, p=q->0", big, 1.0 / big, 1.0 / big),
        )
    towards1 = 1.0 - 10.0 ** (-1.0 - k / 5.0)
    tiny = 10.0 ** (-1.0 - k / 5.0)
    third = 1.0 / 3.0 + tiny
    return (
        ("t->0", 0.02 * 10.0 ** (-k / 5.0), np.full_like(k, 1.0), np.full_like(k, 2.0)),
        ("t->1", towards1, np.full_like(k, 1.0), np.full_like(k, 2.0)),
        ("p->1/3", np.full_like(k, 0.5), third, np.full_like(k, 1.0)),
        ("p->inf", np.full_like(k, 0.5), 4.0 * 10.0 ** (k / 6.0), np.full_like(k, 1.0)),
        ("q->1/3", np.full_like(k, 0.5), np.full_like(k, 1.0), third),
        ("q->inf", np.full_like(k, 0.5), np.full_like(k, 1.0), 4.0 * 10.0 ** (k / 6.0)),
        ("curve p=q->inf", 1.0 / (12.0 * 10.0 ** (k / 6.0)), 4.0 * 10.0 ** (k / 6.0), 4.0 * 10.0 ** (k / 6.0)),
        ("joint t->1, p=q->1/3", towards1, third, third),
    )


def verify_H_nonneg(case: str, grid=120) -> HNonnegReport:
    """Dense-grid minimum of H plus liminf >= 0 along 8 escape rays.

    grid: int n for an n^3 grid, or (nt, np, nq).  Ties in the argmin go to
    the lexicographically smallest index.  The argmin is annotated with its
    distance to the vanishing curve.
    """
    _check_case(case)
    if np.isscalar(grid):
        shape = (int(grid),) * 3
    else:
        shape = tuple(int(g) for g in grid)
    (t0, t1), (p0, p1), (q0, q1) = default_grid_ranges(case)
    ts = np.linspace(t0, t1, shape[0])
    ps = np.linspace(p0, p1, shape[1])
    qs = np.linspace(q0, q1, shape[2])
    vals = H(case, ts[:, None, None], ps[None, :, None], qs[None, None, :])
    flat_idx = int(np.argmin(vals))
    it, ip, iq = np.unravel_index(flat_idx, vals.shape)
    argmin = (float(ts[it]), float(ps[ip]), float(qs[iq]))
    rays = []
    for label, rt, rp, rq in _ray_family(case):
        tail = H(case, rt, rp, rq)[-12:]
        tail_min = float(np.min(tail))
        rays.append(RayCheck(label=label, tail_min=tail_min, passed=bool(tail_min >= -1e-9)))
    return HNonnegReport(
        case=case,
        min_value=float(vals[it, ip, iq]),
        argmin=argmin,
        argmin_curve_distance=curve_distance(*argmin),
        grid_shape=shape,
        rays=tuple(rays),
    )


def slice_max_t(case: str, p: float) -> float:
    """Maximizer of t -> G(t, p, p); the lemma says it is exactly 1/(3p).

    The slice is not unimodal: past the interior peak it dips and then rises
    again toward its t -> infinity limit, so a single bounded Brent search
    can escape to the boundary.  Scan densely first, then refine inside the
    bracketing cell only.
    """
    _check_case(case)
    if case == "spherical":
        if p <= 0.0:
            raise ValueError(f"spherical p must be positive, got {p}")
        hi = max(10.0, 5.0 / (3.0 * p))
    else:
        if p <= 1.0 / 3.0:
            raise ValueError(f"hyperbolic p must exceed 1/3, got {p}")
        hi = 1.0 - 1e-12
    ts = np.linspace(1e-12, hi, 4097)
    k = int(np.argmax(G(case, ts, p, p)))
    res = minimize_scalar(
        lambda t: -float(G(case, t, p, p)),
        bounds=(ts[max(k - 1, 0)], ts[min(k + 1, ts.size - 1)]),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return float(res.x)
