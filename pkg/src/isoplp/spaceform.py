"""Geometry of the constant-curvature model spaces.

Candle functions (Jacobians of the exponential map) of the simply connected
space forms, their first and second antiderivatives, metric-ball volume and
area, and the normalized chord function that maps a chord length to the
cosine of its boundary angle.

Curvature is a continuous parameter.  Every evaluator accepts scalars or
numpy arrays, and the trigonometric, flat and hyperbolic branches agree to
machine precision as kappa -> 0: the antiderivatives are written in
cancellation-free half-angle form instead of the textbook differences of
cosines, which lose ~7 digits near the flat limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "ModelParams",
    "BallGeometry",
    "CurvatureSpectrum",
    "sphere_volume",
    "candle",
    "candle_prime",
    "candle_anti",
    "candle_anti2",
    "ball_volume",
    "ball_area",
    "ball_from_volume",
    "ball_from_radius",
    "max_ball_volume",
    "chord_T",
    "chord_T_prime",
    "chord_T_inverse",
    "delta_weight",
    "candle_from_spectrum",
]


def sphere_volume(k: int) -> float:
    """k-dimensional volume of the unit k-sphere: 2, 2*pi, 4*pi, 2*pi^2, ..."""
    if k < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class ModelParams:
    """Dimension and curvature of a model space."""

    n: int
    kappa: float

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not math.isfinite(self.kappa):
            raise ValueError(f"curvature must be finite, got {self.kappa!r}")

    @property
    def conjugate_radius(self) -> float:
        """Distance to the first conjugate point (inf unless kappa > 0)."""
        if self.kappa > 0:
            return math.pi / math.sqrt(self.kappa)
        return math.inf


@dataclass(frozen=True)
class BallGeometry:
    """A metric ball in a model space with its derived quantities."""

    params: ModelParams
    volume: float
    radius: float
    area: float
    max_chord: float


@dataclass(frozen=True)
class CurvatureSpectrum:
    """Eigenvalues of the curvature operator along a geodesic in dimension len+1."""

    curvatures: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.curvatures) < 1:
            raise ValueError("spectrum needs at least one curvature")
        if not all(math.isfinite(k) for k in self.curvatures):
            raise ValueError("spectrum curvatures must be finite")

    @property
    def n(self) -> int:
        return len(self.curvatures) + 1


def _as_array(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _wrap(value: np.ndarray, scalar: bool):
    return float(value) if scalar else value


def _sn(kappa: float, t: np.ndarray) -> np.ndarray:
    """One dimensional candle: sin(sqrt(k)t)/sqrt(k), t, or sinh(sqrt(-k)t)/sqrt(-k)."""
    if kappa == 0.0:
        return np.array(t, dtype=float, copy=True)
    if kappa > 0.0:
        rt = math.sqrt(kappa)
        return np.sin(rt * t) / rt
    rt = math.sqrt(-kappa)
    return np.sinh(rt * t) / rt


def _cs(kappa: float, t: np.ndarray) -> np.ndarray:
    """Derivative of _sn: cos, 1, or cosh of the scaled argument."""
    if kappa == 0.0:
        return np.ones_like(np.asarray(t, dtype=float))
    if kappa > 0.0:
        return np.cos(math.sqrt(kappa) * t)
    return np.cosh(math.sqrt(-kappa) * t)


_SERIES_CUT = 0.25


def _w_minus_sin(w: np.ndarray) -> np.ndarray:
    """w - sin(w), stable near 0 (direct form loses all digits there)."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = np.abs(w) < _SERIES_CUT
    ws = w[small]
    w2 = ws * ws
    out[small] = (
        ws ** 3 / 6.0
        * (1.0 - w2 / 20.0 * (1.0 - w2 / 42.0 * (1.0 - w2 / 72.0 * (1.0 - w2 / 110.0))))
    )
    wb = w[~small]
    out[~small] = wb - np.sin(wb)
    return out


def _sinh_minus_w(w: np.ndarray) -> np.ndarray:
    """sinh(w) - w, stable near 0."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = np.abs(w) < _SERIES_CUT
    ws = w[small]
    w2 = ws * ws
    out[small] = (
        ws ** 3 / 6.0
        * (1.0 + w2 / 20.0 * (1.0 + w2 / 42.0 * (1.0 + w2 / 72.0 * (1.0 + w2 / 110.0))))
    )
    wb = w[~small]
    out[~small] = np.sinh(wb) - wb
    return out


# Second antiderivative of sin^3 scaled into the n=4 combination
#   psi(u)  = (2/3) u - (3/4) sin u + (1/36) sin 3u        (spherical)
#   psi_(u) = (2/3) u - (3/4) sinh u + (1/36) sinh 3u      (hyperbolic)
# Both are O(u^5): the u and u^3 terms cancel exactly, so evaluating the
# sin/sinh combination directly loses ~2.5/u^2 relative digits for small u.
# Series coefficients c_k = 3 (9^(k-1) - 1) / 4 / (2k+1)!  for k >= 2, with
# alternating signs in the spherical case.  Ten terms keep the truncation
# below 4e-17 up to the cut.
_PSI4_CUT = 0.58
_PSI4_COEFFS = tuple(
    (3 * (9 ** (k - 1) - 1) // 4) / math.factorial(2 * k + 1) for k in range(2, 12)
)


def _psi4(u: np.ndarray, hyperbolic: bool) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    small = np.abs(u) < _PSI4_CUT
    us = u[small]
    w = us * us if hyperbolic else -(us * us)
    acc = np.zeros_like(us)
    for c in reversed(_PSI4_COEFFS):
        acc = acc * w + c
    out[small] = us ** 5 * acc
    ub = u[~small]
    if hyperbolic:
        out[~small] = (2.0 / 3.0) * ub - 0.75 * np.sinh(ub) + np.sinh(3.0 * ub) / 36.0
    else:
        out[~small] = (2.0 / 3.0) * ub - 0.75 * np.sin(ub) + np.sin(3.0 * ub) / 36.0
    return out


def _validate_t(t: np.ndarray) -> None:
    if np.any(t < -1e-15) or not np.all(np.isfinite(t)):
        raise ValueError("lengths must be finite and >= 0")


def candle(params: ModelParams, t) -> float | np.ndarray:
    """Candle function s(t) = _sn(kappa, t)^(n-1), clamped to 0 past the conjugate point."""
    arr, scalar = _as_array(t)
    _validate_t(arr)
    n, kappa = params.n, params.kappa
    if kappa > 0.0:
        cap = params.conjugate_radius
        s1 = _sn(kappa, np.minimum(arr, cap))
        s1 = np.where(arr >= cap, 0.0, s1)
    else:
        s1 = _sn(kappa, arr)
    return _wrap(s1 ** (n - 1), scalar)


def candle_prime(params: ModelParams, t) -> float | np.ndarray:
    """Derivative of the candle function, 0 past the conjugate point."""
    arr, scalar = _as_array(t)
    _validate_t(arr)
    n, kappa = params.n, params.kappa
    if kappa > 0.0:
        cap = params.conjugate_radius
        tc = np.minimum(arr, cap)
        val = (n - 1) * _sn(kappa, tc) ** (n - 2) * _cs(kappa, tc)
        val = np.where(arr >= cap, 0.0, val)
    else:
        val = (n - 1) * _sn(kappa, arr) ** (n - 2) * _cs(kappa, arr)
    return _wrap(val, scalar)


def _anti_quad(params: ModelParams, arr: np.ndarray) -> np.ndarray:
    flat = arr.ravel()
    out = np.array([quad(lambda y: candle(params, y), 0.0, ti, limit=200)[0] for ti in flat])
    return out.reshape(arr.shape)


def _anti2_quad(params: ModelParams, arr: np.ndarray) -> np.ndarray:
    # second antiderivative as a single integral of (t - y) s(y)
    flat = arr.ravel()
    out = np.array(
        [quad(lambda y, ti=ti: (ti - y) * candle(params, y), 0.0, ti, limit=200)[0] for ti in flat]
    )
    return out.reshape(arr.shape)


def candle_anti(params: ModelParams, t) -> float | np.ndarray:
    """First antiderivative of the candle function, vanishing at 0.

    Closed cancellation-free forms for n in {2, 4}; for kappa > 0 the value
    saturates at the conjugate radius.  Other dimensions fall back to
    adaptive quadrature.
    """
    arr, scalar = _as_array(t)
    _validate_t(arr)
    n, kappa = params.n, params.kappa
    if n not in (2, 4):
        return _wrap(_anti_quad(params, arr), scalar)
    tc = np.minimum(arr, params.conjugate_radius) if kappa > 0.0 else arr
    s2 = _sn(kappa, tc / 2.0)
    if n == 2:
        val = 2.0 * s2 * s2
    else:
        s2sq = s2 * s2
        val = s2sq * s2sq * (4.0 - (8.0 / 3.0) * kappa * s2sq)
    return _wrap(val, scalar)


def candle_anti2(params: ModelParams, t) -> float | np.ndarray:
    """Second antiderivative of the candle function (both derivatives vanish at 0).

    For kappa > 0 the continuation past the conjugate radius is linear with
    slope candle_anti at the cap.  Stable for small |kappa|*t^2 via guarded
    series for w - sin(w) and sinh(w) - w.
    """
    arr, scalar = _as_array(t)
    _validate_t(arr)
    n, kappa = params.n, params.kappa
    if n not in (2, 4):
        return _wrap(_anti2_quad(params, arr), scalar)

    if kappa == 0.0:
        val = arr ** 3 / 6.0 if n == 2 else arr ** 5 / 20.0
        return _wrap(val, scalar)

    if kappa > 0.0:
        rt = math.sqrt(kappa)
        cap = params.conjugate_radius
        u = rt * np.minimum(arr, cap)
        if n == 2:
            base = _w_minus_sin(u) * kappa ** -1.5
            slope = 2.0 / kappa
        else:
            base = _psi4(u, hyperbolic=False) * kappa ** -2.5
            slope = (4.0 / 3.0) / kappa ** 2
        val = base + slope * np.maximum(arr - cap, 0.0)
        return _wrap(val, scalar)

    rt = math.sqrt(-kappa)
    u = rt * arr
    if n == 2:
        val = _sinh_minus_w(u) * rt ** -3
    else:
        val = _psi4(u, hyperbolic=True) * rt ** -5
    return _wrap(val, scalar)


def ball_volume(params: ModelParams, r) -> float | np.ndarray:
    """Volume of the metric ball of radius r."""
    return sphere_volume(params.n - 1) * candle_anti(params, r)


def ball_area(params: ModelParams, r) -> float | np.ndarray:
    """Boundary area of the metric ball of radius r."""
    return sphere_volume(params.n - 1) * candle(params, r)


def max_ball_volume(params: ModelParams) -> float:
    """Volume of the hemisphere (kappa > 0); inf otherwise."""
    if params.kappa <= 0.0:
        return math.inf
    return params.kappa ** (-params.n / 2.0) * sphere_volume(params.n) / 2.0


def ball_from_radius(params: ModelParams, r: float) -> BallGeometry:
    """Ball geometry from its radius."""
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"radius must be positive and finite, got {r!r}")
    if params.kappa > 0.0 and r > math.pi / (2.0 * math.sqrt(params.kappa)) * (1 + 1e-12):
        raise ValueError("radius exceeds the hemisphere radius for this curvature")
    return BallGeometry(
        params=params,
        volume=float(ball_volume(params, r)),
        radius=float(r),
        area=float(ball_area(params, r)),
        max_chord=float(2.0 * r),
    )


def ball_from_volume(params: ModelParams, volume: float) -> BallGeometry:
    """Invert r -> |B(r)| by safeguarded Newton (relative accuracy ~1e-14).

    For kappa > 0 the volume must not exceed the hemisphere volume.
    """
    if not (volume > 0.0 and math.isfinite(volume)):
        raise ValueError(f"volume must be positive and finite, got {volume!r}")
    omega = sphere_volume(params.n - 1)
    target = volume / omega

    lo = 0.0
    if params.kappa > 0.0:
        vmax = max_ball_volume(params)
        if volume > vmax * (1.0 + 1e-12):
            raise ValueError(
                f"volume {volume} exceeds the hemisphere volume {vmax} at curvature {params.kappa}"
            )
        hi = math.pi / (2.0 * math.sqrt(params.kappa))
        if volume >= vmax:
            return ball_from_radius(params, hi)
    else:
        # flat-space guess, doubled until it brackets
        hi = (params.n * target) ** (1.0 / params.n)
        for _ in range(200):
            if candle_anti(params, hi) >= target:
                break
            hi *= 2.0
        else:
            raise ValueError("failed to bracket the radius")

    r = 0.5 * (lo + hi)
    for _ in range(200):
        f = float(candle_anti(params, r)) - target
        if f > 0.0:
            hi = r
        else:
            lo = r
        df = float(candle(params, r))
        step_ok = False
        if df > 0.0:
            r_new = r - f / df
            if lo < r_new < hi:
                step_ok = True
        if not step_ok:
            r_new = 0.5 * (lo + hi)
        if abs(r_new - r) <= 1e-15 * max(1.0, abs(r_new)):
            r = r_new
            break
        r = r_new
    return ball_from_radius(params, r)


def _validate_chord_args(kappa: float, r: float) -> None:
    if not (r > 0.0 and math.isfinite(r)):
        raise ValueError(f"radius must be positive and finite, got {r!r}")
    if kappa > 0.0 and r >= math.pi / (2.0 * math.sqrt(kappa)):
        raise ValueError("chord function needs r strictly inside the hemisphere")


def chord_T(kappa: float, r: float, ell) -> float | np.ndarray:
    """Normalized chord function: cosine of the boundary angle of a chord of length ell.

    Increases from 0 at ell=0 to 1 at ell=2r.
    """
    _validate_chord_args(kappa, r)
    arr, scalar = _as_array(ell)
    if np.any(arr < -1e-12 * r) or np.any(arr > 2.0 * r * (1 + 1e-12)):
        raise ValueError("chord length must lie in [0, 2r]")
    arr = np.clip(arr, 0.0, 2.0 * r)
    if kappa == 0.0:
        val = arr / (2.0 * r)
    elif kappa > 0.0:
        rt = math.sqrt(kappa)
        val = np.tan(rt * arr / 2.0) / math.tan(rt * r)
    else:
        rt = math.sqrt(-kappa)
        val = np.tanh(rt * arr / 2.0) / math.tanh(rt * r)
    return _wrap(val, scalar)


def chord_T_prime(kappa: float, r: float, ell) -> float | np.ndarray:
    """Derivative of chord_T with respect to the chord length."""
    _validate_chord_args(kappa, r)
    arr, scalar = _as_array(ell)
    if kappa == 0.0:
        val = np.full_like(arr, 1.0 / (2.0 * r))
    elif kappa > 0.0:
        rt = math.sqrt(kappa)
        val = rt / (2.0 * math.tan(rt * r) * np.cos(rt * arr / 2.0) ** 2)
    else:
        rt = math.sqrt(-kappa)
        val = rt / (2.0 * math.tanh(rt * r) * np.cosh(rt * arr / 2.0) ** 2)
    return _wrap(val, scalar)


def chord_T_inverse(kappa: float, r: float, c) -> float | np.ndarray:
    """Chord length whose boundary-angle cosine equals c (inverse of chord_T)."""
    _validate_chord_args(kappa, r)
    arr, scalar = _as_array(c)
    if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
        raise ValueError("chord_T value must lie in [0, 1]")
    arr = np.clip(arr, 0.0, 1.0)
    if kappa == 0.0:
        val = 2.0 * r * arr
    elif kappa > 0.0:
        rt = math.sqrt(kappa)
        val = (2.0 / rt) * np.arctan(arr * math.tan(rt * r))
    else:
        rt = math.sqrt(-kappa)
        val = (2.0 / rt) * np.arctanh(arr * math.tanh(rt * r))
    return _wrap(val, scalar)


def delta_weight(n: int, alpha) -> float | np.ndarray:
    """Boundary-angle density omega_{n-2} sin^(n-2)(alpha) cos(alpha) on [0, pi/2]."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    arr, scalar = _as_array(alpha)
    if np.any(arr < -1e-12) or np.any(arr > math.pi / 2.0 + 1e-12):
        raise ValueError("angle must lie in [0, pi/2]")
    val = sphere_volume(n - 2) * np.sin(arr) ** (n - 2) * np.cos(arr)
    return _wrap(val, scalar)


def candle_from_spectrum(spectrum: CurvatureSpectrum, t, return_flag: bool = False):
    """Candle of a space whose curvature operator has the given eigenvalues.

    Product of the one dimensional candles; clamped to 0 past the first
    conjugate point when some eigenvalue is positive.  With return_flag the
    second element reports whether the clamp was active anywhere.
    """
    arr, scalar = _as_array(t)
    _validate_t(arr)
    kmax = max(spectrum.curvatures)
    cap = math.pi / math.sqrt(kmax) if kmax > 0.0 else math.inf
    tc = np.minimum(arr, cap)
    val = np.ones_like(arr)
    for k in spectrum.curvatures:
        val = val * _sn(k, tc)
    clipped = arr >= cap
    val = np.where(clipped, 0.0, val)
    out = _wrap(val, scalar)
    if return_flag:
        return out, bool(np.any(clipped))
    return out
