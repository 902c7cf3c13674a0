"""Inequalities available below a negative curvature bound.

For curvature <= -1 the dual certificate has a negative coefficient, so the
linear-programming route needs extra structure: a smallness condition on
the manifold, a combined quadratic inequality in the three chord
functionals (tight on the model ball), and a candle-comparison inequality
whose failure for the complex-hyperbolic candle is reproduced here by a
deterministic grid search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .chordmeasure import DiscreteMeasure, integrate
from .spaceform import (
    CurvatureSpectrum,
    ModelParams,
    ball_from_radius,
    candle,
    candle_anti,
    candle_anti2,
    candle_from_spectrum,
)

__all__ = [
    "SmallnessInput",
    "SmallnessCheck",
    "CounterexampleResult",
    "CH2_SPECTRUM",
    "smallness_ok",
    "conjecture_residual",
    "conjecture_rhs",
    "hyp2_lemma_residual",
    "question1_margin",
    "ch2_counterexample_search",
]

# Complex hyperbolic plane (real dimension 4) normalized so the sectional
# curvature ranges over [-9/4, -9/16].
CH2_SPECTRUM = CurvatureSpectrum((-9.0 / 4.0, -9.0 / 16.0, -9.0 / 16.0))


@dataclass(frozen=True)
class SmallnessInput:
    """Curvature bound kappa < 0, max geodesic length L, comparison radius r."""

    kappa: float
    L: float
    r: float

    def __post_init__(self) -> None:
        if not (self.kappa < 0.0 and math.isfinite(self.kappa)):
            raise ValueError(f"kappa must be negative and finite, got {self.kappa}")
        if not (self.L > 0.0 and self.r > 0.0):
            raise ValueError("L and r must be positive")


@dataclass(frozen=True)
class SmallnessCheck:
    ok: bool
    margin: float
    product: float

    def __iter__(self):
        yield self.ok
        yield self.margin


def smallness_ok(inp: SmallnessInput) -> SmallnessCheck:
    """tanh(L sqrt(-kappa)) * tanh(r sqrt(-kappa)) <= 1/2, with its margin.

    The product is invariant under (kappa, L, r) -> (lam^2 kappa, L/lam, r/lam).
    """
    rt = math.sqrt(-inp.kappa)
    product = math.tanh(inp.L * rt) * math.tanh(inp.r * rt)
    return SmallnessCheck(ok=product <= 0.5, margin=0.5 - product, product=product)


def conjecture_rhs(r: float) -> float:
    """A^2 - 6 tanh(r) A V + 9 tanh(r)^2 V^2 for the hyperbolic 4-ball of radius r."""
    ball = ball_from_radius(ModelParams(4, -1.0), r)
    tr = math.tanh(r)
    return ball.area ** 2 - 6.0 * tr * ball.area * ball.volume + 9.0 * tr * tr * ball.volume ** 2


def conjecture_residual(r: float, measure: DiscreteMeasure) -> float:
    """LHS - RHS of the combined inequality

        integral (F1 - 6 tanh(r) F2 + 9 tanh(r)^2 F3) d(mu)
            <= A^2 - 6 tanh(r) A V + 9 tanh(r)^2 V^2

    in the hyperbolic (n=4, kappa=-1) model.  Zero (to quadrature accuracy)
    when the measure is the chord measure of the ball of radius r; negative
    when mass is removed.
    """
    params = ModelParams(4, -1.0)
    tr = math.tanh(r)
    lhs = (
        integrate(measure, "F1", params)
        - 6.0 * tr * integrate(measure, "F2", params)
        + 9.0 * tr * tr * integrate(measure, "F3", params)
    )
    return lhs - conjecture_rhs(r)


def hyp2_lemma_residual(r: float, measure: DiscreteMeasure) -> float:
    """LHS - RHS of the hyperbolic disk inequality

        integral (F2 - tanh(r) F3) d(mu)  <=  A V - tanh(r) V^2.

    Convention note: under the chord-measure normalization in which
    integral of ell equals omega_1 * V, the right-hand side that closes to
    equality for the model disk carries a bare V^2 (no extra 2 pi); that
    convention is adopted here and verified by the tests.
    """
    params = ModelParams(2, -1.0)
    ball = ball_from_radius(params, r)
    tr = math.tanh(r)
    lhs = integrate(measure, "F2", params) - tr * integrate(measure, "F3", params)
    rhs = ball.area * ball.volume - tr * ball.volume ** 2
    return lhs - rhs


def _difference_kernels(spectrum: CurvatureSpectrum, ell: float, kappa_cmp: float):
    """(j - s)(ell), integral over [0, ell] of (j - s), and the nested double
    integral, all as differences so a matching spectrum gives exact zeros."""
    params = ModelParams(spectrum.n, kappa_cmp)

    def u(t: float) -> float:
        return float(candle_from_spectrum(spectrum, t)) - float(candle(params, t))

    u0 = u(ell)
    u1, _ = quad(u, 0.0, ell, epsabs=1e-9, epsrel=1e-11, limit=200)
    # double integral of u over {0 <= x <= y <= ell} = integral of (ell - y) u(y)
    u2, _ = quad(lambda y: (ell - y) * u(y), 0.0, ell, epsabs=1e-9, epsrel=1e-11, limit=200)
    return u0, u1, u2


def question1_margin(
    spectrum: CurvatureSpectrum,
    r: float,
    ell: float,
    alpha: float = 0.0,
    beta: float = 0.0,
    kappa_cmp: float = -1.0,
) -> float:
    """Margin of the candle-comparison inequality for one chord.

    LHS(spectrum candle j) minus RHS(model candle s at curvature kappa_cmp),
    with the kernel structure

        j(ell)/cc - 3 tanh(r) (J1/cos a + J1/cos b) + 9 tanh(r)^2 J2,

    computed directly on the differences j - s, so the model spectrum gives
    an exact zero margin.  Negative margin = inequality violated.
    """
    if not (ell > 0.0 and r > 0.0):
        raise ValueError("r and ell must be positive")
    u0, u1, u2 = _difference_kernels(spectrum, ell, kappa_cmp)
    tr = math.tanh(r)
    ca, cb = math.cos(alpha), math.cos(beta)
    return u0 / (ca * cb) - 3.0 * tr * (u1 / ca + u1 / cb) + 9.0 * tr * tr * u2


def _ch2_difference_closed(ell: np.ndarray):
    """Closed forms of the difference kernels for the CH^2 spectrum vs kappa=-1.

    j(t) = [sinh(3t)/4 - sinh(1.5t)/2] / (27/32), s(t) = sinh(t)^3; the
    antiderivatives follow termwise.
    """
    c = 32.0 / 27.0
    u0 = c * (0.25 * np.sinh(3.0 * ell) - 0.5 * np.sinh(1.5 * ell)) - (
        0.25 * np.sinh(3.0 * ell) - 0.75 * np.sinh(ell)
    )
    u1 = c * ((np.cosh(3.0 * ell) - 1.0) / 12.0 - (np.cosh(1.5 * ell) - 1.0) / 3.0) - (
        np.cosh(3.0 * ell) / 12.0 - 0.75 * np.cosh(ell) + 2.0 / 3.0
    )
    u2 = c * (np.sinh(3.0 * ell) / 36.0 - ell / 12.0 - (np.sinh(1.5 * ell) / 4.5 - ell / 3.0)) - (
        np.sinh(3.0 * ell) / 36.0 - 0.75 * np.sinh(ell) + ell * 2.0 / 3.0
    )
    return u0, u1, u2


@dataclass(frozen=True)
class CounterexampleResult:
    r: float
    ell: float
    margin: float
    grid_shape: tuple[int, int]

    @property
    def violated(self) -> bool:
        return self.margin < 0.0


def ch2_counterexample_search(
    ell_max: float, r_max: float, grid: tuple[int, int] = (80, 60)
) -> CounterexampleResult:
    """Deterministic grid search for a violation by the complex-hyperbolic candle.

    Scans the Question-1 margin at cos(alpha) = cos(beta) = 1 over
    (0, r_max] x (0, ell_max] using closed-form difference kernels (the
    hyperbolic-sine sums integrate termwise), returning the most negative
    margin and its location.  Ties go to the first grid point scanned.
    """
    if ell_max <= 0.0 or r_max <= 0.0:
        raise ValueError("search bounds must be positive")
    n_ell, n_r = int(grid[0]), int(grid[1])
    ells = np.linspace(ell_max / n_ell, ell_max, n_ell)
    rs = np.linspace(r_max / n_r, r_max, n_r)
    u0, u1, u2 = _ch2_difference_closed(ells)
    tr = np.tanh(rs)[:, None]
    margins = u0[None, :] - 6.0 * tr * u1[None, :] + 9.0 * tr * tr * u2[None, :]
    flat = int(np.argmin(margins))
    ir, il = np.unravel_index(flat, margins.shape)
    return CounterexampleResult(
        r=float(rs[ir]),
        ell=float(ells[il]),
        margin=float(margins[ir, il]),
        grid_shape=(n_ell, n_r),
    )
