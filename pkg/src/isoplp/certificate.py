"""Dual certificates for the isoperimetric linear program.

A certificate is a coefficient vector (a, b, c, d) for the four structural
rows of the program.  Along the chord curve of the model ball the combined
row must be stationary in the chord length; that consistency equation

    d = a * candle'(ell)/T^2 + b * candle(ell)/T + c * candle_anti(ell),
    cos(alpha) = T = chord_T(ell)

pins the coefficients up to scale, and the induced admissible test function

    f(alpha, beta) = sup_ell [ d*ell - a*F1 - b*F2 - c*F3 ](ell, alpha, beta)

closes the duality argument.  This module reconstructs coefficients
numerically (SVD of the collocated consistency system), tabulates the six
closed-form cases, computes f by a guarded scan + derivative refinement,
and verifies all required properties of a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .spaceform import (
    ModelParams,
    ball_from_volume,
    candle,
    candle_anti,
    candle_anti2,
    candle_prime,
    chord_T,
    chord_T_inverse,
)

__all__ = [
    "DualCertificate",
    "ConsistencyFit",
    "MembershipReport",
    "CertificateReport",
    "DegenerateConsistencyError",
    "SupDomainError",
    "UnverifiedCertificateError",
    "REFERENCE_CASES",
    "solve_consistency",
    "paper_certificate",
    "sup_integrand",
    "sup_integrand_dell",
    "build_f",
    "evaluate_f",
    "check_family_membership",
    "verify_certificate",
    "duality_lower_bound",
]


class DegenerateConsistencyError(RuntimeError):
    """Consistency system has a kernel of dimension != 1."""


class SupDomainError(RuntimeError):
    """The sup over chord lengths escaped to the artificial domain cap."""


class UnverifiedCertificateError(RuntimeError):
    """A bound was requested from a certificate that failed verification."""


@dataclass(frozen=True)
class DualCertificate:
    """Row coefficients (a, b, c, d) for a ball of radius r, plus optional closed f."""

    params: ModelParams
    r: float
    a: float
    b: float
    c: float
    d: float
    source: str = "custom"
    f_closed: Callable | None = None
    argmax_closed: Callable | None = None

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    @property
    def has_closed_form(self) -> bool:
        return self.f_closed is not None

    @property
    def negative_coefficients(self) -> tuple[str, ...]:
        names = ("a", "b", "c", "d")
        return tuple(n for n, v in zip(names, self.coefficients) if v < 0)


class ConsistencyFit(NamedTuple):
    a: float
    b: float
    c: float
    d: float
    residual: float


def _consistency_columns(params: ModelParams, r: float, ell: np.ndarray) -> np.ndarray:
    T = np.asarray(chord_T(params.kappa, r, ell))
    cols = np.column_stack(
        [
            np.asarray(candle_prime(params, ell)) / T ** 2,
            np.asarray(candle(params, ell)) / T,
            np.asarray(candle_anti(params, ell)),
            -np.ones_like(T),
        ]
    )
    return cols


def _cheb_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    x = np.cos((2 * k - 1) / (2 * n) * math.pi)
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[::-1]


def solve_consistency(params: ModelParams, r: float, node_count: int = 64) -> ConsistencyFit:
    """Recover certificate coefficients from the stationarity equation on the curve.

    Collocates the 4-column linear system at Chebyshev chord lengths, takes
    the SVD kernel (columns scaled to unit norm first), and normalizes the
    gauge to a=1 when a is non-negligible, else b=1.  The residual is the
    max defect on a 10x denser grid.  Raises DegenerateConsistencyError when
    the kernel is not one dimensional.
    """
    if node_count < 8:
        raise ValueError(f"need at least 8 collocation nodes, got {node_count}")
    if params.kappa > 0.0 and r >= math.pi / (2.0 * math.sqrt(params.kappa)):
        raise ValueError("radius must be strictly inside the hemisphere")
    lo, hi = 0.02 * 2.0 * r, 0.98 * 2.0 * r
    cols = _consistency_columns(params, r, _cheb_nodes(lo, hi, node_count))
    scale = np.linalg.norm(cols, axis=0)
    scale[scale == 0.0] = 1.0
    _, sing, vt = np.linalg.svd(cols / scale, full_matrices=False)
    if sing[-2] < 1e-10 * sing[0]:
        raise DegenerateConsistencyError(
            f"consistency kernel has dimension > 1; singular values {sing.tolist()}"
        )
    v = vt[-1] / scale
    if abs(v[0]) > 1e-8 * np.max(np.abs(v)):
        v = v / v[0]
    elif abs(v[1]) > 1e-8 * np.max(np.abs(v)):
        v = v / v[1]
    else:
        v = v / v[np.argmax(np.abs(v))]
    dense = _consistency_columns(params, r, _cheb_nodes(lo, hi, 10 * node_count))
    residual = float(np.max(np.abs(dense @ v)))
    return ConsistencyFit(float(v[0]), float(v[1]), float(v[2]), float(v[3]), residual)


def _sec_sum(alpha, beta):
    return 1.0 / np.cos(alpha) + 1.0 / np.cos(beta)


def _make_reference(params: ModelParams, r: float) -> DualCertificate | None:
    n, kappa = params.n, params.kappa
    if kappa == 0.0 and n == 4:
        return DualCertificate(
            params, r, 1.0, 0.0, 0.0, 12.0 * r * r, source="reference",
            f_closed=lambda a, b, _r=r: 16.0 * _r ** 3 * np.sqrt(np.cos(a) * np.cos(b)),
            argmax_closed=lambda a, b, _r=r: 2.0 * _r * np.sqrt(np.cos(a) * np.cos(b)),
        )
    if kappa == 0.0 and n == 2:
        return DualCertificate(
            params, r, 0.0, 1.0, 0.0, 2.0 * r, source="reference",
            f_closed=lambda a, b, _r=r: 4.0 * _r ** 2 / _sec_sum(a, b),
            argmax_closed=lambda a, b, _r=r: 4.0 * _r / _sec_sum(a, b),
        )
    if kappa == 1.0 and n == 4:
        t = math.tan(r)
        return DualCertificate(params, r, 1.0, 6.0 * t, 9.0 * t * t, 12.0 * t * t, source="reference")
    if kappa == 1.0 and n == 2:
        t = math.tan(r)
        return DualCertificate(
            params, r, 0.0, 1.0, t, 2.0 * t, source="reference",
            f_closed=lambda a, b, _t=t: 2.0 * _t * np.arctan(2.0 * _t / _sec_sum(a, b)),
            argmax_closed=lambda a, b, _t=t: 2.0 * np.arctan(2.0 * _t / _sec_sum(a, b)),
        )
    if kappa == -1.0 and n == 4:
        t = math.tanh(r)
        return DualCertificate(params, r, 1.0, -6.0 * t, 9.0 * t * t, 12.0 * t * t, source="reference")
    if kappa == -1.0 and n == 2:
        t = math.tanh(r)
        return DualCertificate(
            params, r, 0.0, 1.0, -t, 2.0 * t, source="reference",
            f_closed=lambda a, b, _t=t: 2.0 * _t * np.arctanh(2.0 * _t / _sec_sum(a, b)),
            argmax_closed=lambda a, b, _t=t: 2.0 * np.arctanh(2.0 * _t / _sec_sum(a, b)),
        )
    return None


REFERENCE_CASES = ((2, 0.0), (4, 0.0), (2, 1.0), (4, 1.0), (2, -1.0), (4, -1.0))


def paper_certificate(params: ModelParams, r: float) -> DualCertificate:
    """Tabulated reference certificate for the six solved (n, kappa) cases."""
    if params.kappa > 0.0 and r >= math.pi / (2.0 * math.sqrt(params.kappa)):
        raise ValueError("radius must be strictly inside the hemisphere")
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"radius must be positive and finite, got {r!r}")
    cert = _make_reference(params, r)
    if cert is None:
        raise ValueError(
            f"no tabulated certificate for (n, kappa) = ({params.n}, {params.kappa}); "
            f"known cases: {REFERENCE_CASES}"
        )
    return cert


def sup_integrand(cert: DualCertificate, ell, alpha, beta):
    """d*ell - a*F1 - b*F2 - c*F3 at one chord; f is its sup over ell.

    Zero coefficients skip their term, so secant factors of unused rows
    cannot poison the arithmetic.
    """
    params = cert.params
    out = cert.d * np.asarray(ell, dtype=float)
    if cert.a != 0.0:
        out = out - cert.a * candle(params, ell) / (np.cos(alpha) * np.cos(beta))
    if cert.b != 0.0:
        out = out - cert.b * candle_anti(params, ell) / 2.0 * _sec_sum(alpha, beta)
    if cert.c != 0.0:
        out = out - cert.c * candle_anti2(params, ell)
    return out


def sup_integrand_dell(cert: DualCertificate, ell, alpha, beta):
    """Derivative of sup_integrand in the chord length."""
    params = cert.params
    out = np.full(np.broadcast(np.asarray(ell, float), alpha, beta).shape, cert.d, dtype=float)
    if cert.a != 0.0:
        out = out - cert.a * candle_prime(params, ell) / (np.cos(alpha) * np.cos(beta))
    if cert.b != 0.0:
        out = out - cert.b * candle(params, ell) / 2.0 * _sec_sum(alpha, beta)
    if cert.c != 0.0:
        out = out - cert.c * candle_anti(params, ell)
    return out


_SCAN_NODES = 512
_CAP_FACTOR = 40.0


def _sup_domain(cert: DualCertificate) -> tuple[float, bool]:
    if cert.params.kappa > 0.0:
        return math.pi / math.sqrt(cert.params.kappa), False
    return _CAP_FACTOR * max(1.0, cert.r), True


def build_f(cert: DualCertificate, alpha, beta):
    """Numeric sup over chord lengths: returns (value, argmax) arrays.

    Dense scan, then bisection on the analytic ell-derivative inside the
    bracketing cell (golden-section fallback on plateaus).  For kappa <= 0
    the domain is capped at 40*max(1, r); a sup escaping to the cap raises
    SupDomainError since the certificate then bounds nothing.
    """
    a_arr = np.asarray(alpha, dtype=float)
    b_arr = np.asarray(beta, dtype=float)
    shape = np.broadcast(a_arr, b_arr).shape
    A = np.broadcast_to(a_arr, shape).ravel()
    B = np.broadcast_to(b_arr, shape).ravel()
    lmax, capped = _sup_domain(cert)
    nodes = np.linspace(0.0, lmax, _SCAN_NODES)
    G = sup_integrand(cert, nodes[:, None], A[None, :], B[None, :])
    k = np.argmax(G, axis=0)
    if capped and np.any(k >= _SCAN_NODES - 1):
        raise SupDomainError(
            f"sup escaped past the domain cap ell={lmax:.3g} for "
            f"{int(np.sum(k >= _SCAN_NODES - 1))} angle pairs; certificate is unbounded"
        )
    lo = nodes[np.maximum(k - 1, 0)]
    hi = nodes[np.minimum(k + 1, _SCAN_NODES - 1)]

    dlo = sup_integrand_dell(cert, lo, A, B)
    dhi = sup_integrand_dell(cert, hi, A, B)
    cross = (dlo > 0.0) & (dhi < 0.0)

    blo, bhi = lo.copy(), hi.copy()
    for _ in range(70):
        mid = 0.5 * (blo + bhi)
        dm = sup_integrand_dell(cert, mid, A, B)
        take_hi = dm > 0.0
        blo = np.where(cross & take_hi, mid, blo)
        bhi = np.where(cross & ~take_hi, mid, bhi)

    glo, ghi = lo.copy(), hi.copy()
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(60):
        x1 = ghi - inv * (ghi - glo)
        x2 = glo + inv * (ghi - glo)
        f1 = sup_integrand(cert, x1, A, B)
        f2 = sup_integrand(cert, x2, A, B)
        keep_right = f1 < f2
        glo = np.where(keep_right, x1, glo)
        ghi = np.where(keep_right, ghi, x2)
    golden_arg = 0.5 * (glo + ghi)

    arg = np.where(cross, 0.5 * (blo + bhi), golden_arg)
    val = sup_integrand(cert, arg, A, B)
    val = np.maximum(val, G[k, np.arange(A.size)])
    if shape == ():
        return float(val[0]), float(arg[0])
    return val.reshape(shape), arg.reshape(shape)


def evaluate_f(cert: DualCertificate, alpha, beta):
    """Closed-form f when tabulated, numeric sup otherwise; returns (value, argmax)."""
    if cert.has_closed_form:
        return cert.f_closed(alpha, beta), cert.argmax_closed(alpha, beta)
    return build_f(cert, alpha, beta)


@dataclass
class MembershipReport:
    """Admissibility of f: nonnegative, with concavity-type diagonal defect >= 0."""

    grid_angles: np.ndarray
    min_f: float
    min_defect: float
    max_equality_gap: float
    f_nonneg_ok: bool
    defect_ok: bool
    equality_on_diagonal: bool

    @property
    def passed(self) -> bool:
        return self.f_nonneg_ok and self.defect_ok and self.equality_on_diagonal


_DEFECT_TOL = 1e-9


def check_family_membership(cert: DualCertificate, grid=80) -> MembershipReport:
    """Check f >= 0 and (f(a,a)+f(b,b))/2 - f(a,b) >= 0 on an angle grid.

    grid: node count or explicit angle array in [0, pi/2).  Equality of the
    defect should only happen next to the diagonal.
    """
    if np.isscalar(grid):
        angles = np.linspace(0.0, math.pi / 2.0 - 1e-3, int(grid))
    else:
        angles = np.asarray(grid, dtype=float)
    A, B = np.meshgrid(angles, angles, indexing="ij")
    fvals, _ = evaluate_f(cert, A, B)
    fdiag = np.diag(fvals)
    defect = 0.5 * (fdiag[:, None] + fdiag[None, :]) - fvals
    eq_i, eq_j = np.nonzero(defect <= _DEFECT_TOL)
    max_gap = float(np.max(np.abs(angles[eq_i] - angles[eq_j]), initial=0.0))
    step = float(np.max(np.diff(angles))) if angles.size > 1 else 0.0
    return MembershipReport(
        grid_angles=angles,
        min_f=float(fvals.min()),
        min_defect=float(defect.min()),
        max_equality_gap=max_gap,
        f_nonneg_ok=bool(fvals.min() >= -_DEFECT_TOL),
        defect_ok=bool(defect.min() >= -_DEFECT_TOL),
        equality_on_diagonal=bool(max_gap <= step * (1 + 1e-9)),
    )


@dataclass
class CertificateReport:
    consistency_residual: float
    consistency_ok: bool
    curve_sup_deviation: float
    curve_sup_ok: bool
    membership: MembershipReport
    negative_coefficients: tuple[str, ...]
    nonneg_required: bool

    @property
    def nonneg_ok(self) -> bool:
        return not self.negative_coefficients

    @property
    def passed(self) -> bool:
        return (
            self.consistency_ok
            and self.curve_sup_ok
            and self.membership.passed
            and (self.nonneg_ok or not self.nonneg_required)
        )


def verify_certificate(
    cert: DualCertificate,
    grid: int = 80,
    require_nonneg: bool = True,
    consistency_nodes: int = 200,
    curve_nodes: int = 60,
) -> CertificateReport:
    """Full certificate check: consistency, sup location on the curve, membership, signs.

    The sup check takes chord lengths ell0 on the curve, sets both angles to
    arccos(chord_T(ell0)), and requires the numeric argmax of the sup to
    return to ell0 (tolerance 1e-8 absolute + relative).
    """
    params, r = cert.params, cert.r
    cols = _consistency_columns(params, r, _cheb_nodes(0.02 * 2 * r, 0.98 * 2 * r, consistency_nodes))
    coeff_scale = max(abs(v) for v in cert.coefficients)
    consistency_residual = float(np.max(np.abs(cols @ np.array(cert.coefficients)))) / max(coeff_scale, 1e-300)
    consistency_ok = consistency_residual <= 1e-8

    ell0 = np.linspace(0.05 * 2 * r, 0.95 * 2 * r, curve_nodes)
    alpha0 = np.arccos(np.asarray(chord_T(params.kappa, r, ell0)))
    _, argmax = build_f(cert, alpha0, alpha0)
    curve_dev = float(np.max(np.abs(argmax - ell0) / (1.0 + np.abs(ell0))))
    curve_sup_ok = curve_dev <= 1e-8

    membership = check_family_membership(cert, grid)
    return CertificateReport(
        consistency_residual=consistency_residual,
        consistency_ok=consistency_ok,
        curve_sup_deviation=curve_dev,
        curve_sup_ok=curve_sup_ok,
        membership=membership,
        negative_coefficients=cert.negative_coefficients,
        nonneg_required=require_nonneg,
    )


def duality_lower_bound(cert: DualCertificate, V: float, require_nonneg: bool = True) -> float:
    """Area lower bound certified for volume V; raises unless the certificate verifies.

    With nonnegative verified coefficients the dual argument pins the LP
    optimum to the model ball's boundary area, which is returned.
    """
    report = verify_certificate(cert, require_nonneg=require_nonneg)
    if not report.passed:
        raise UnverifiedCertificateError(
            f"certificate failed verification: consistency_ok={report.consistency_ok}, "
            f"curve_sup_ok={report.curve_sup_ok}, membership={report.membership.passed}, "
            f"negative={report.negative_coefficients}"
        )
    ball = ball_from_volume(cert.params, V)
    return ball.area
