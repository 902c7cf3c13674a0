"""Chord measures of metric balls in model spaces.

A chord of a ball is an oriented geodesic segment with both endpoints on the
boundary; it is described by its length ell and the two boundary angles
alpha, beta in [0, pi/2).  For a round ball the measure concentrates on the
curve cos(alpha) = cos(beta) = chord_T(ell), with angle marginal
area * delta_weight(n, alpha) d(alpha).

Measures are discrete here: finitely many weighted atoms, produced either by
Gauss-Legendre quadrature in the angle variable (which also regularizes the
integrable n=2 endpoint singularity of the length density) or by seeded
Monte Carlo sampling.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .spaceform import (
    BallGeometry,
    ModelParams,
    candle,
    candle_anti,
    candle_anti2,
    chord_T,
    chord_T_inverse,
    chord_T_prime,
    delta_weight,
    sphere_volume,
)

__all__ = [
    "ChordAtom",
    "DiscreteMeasure",
    "FUNCTIONAL_IDS",
    "gauss_legendre",
    "ball_chord_density",
    "discretize_ball_measure",
    "sample_chords",
    "integrate",
    "santalo_residual",
    "croke_residual",
    "measure_to_csv",
    "measure_from_csv",
    "measure_to_json",
    "measure_from_json",
]

_PROVENANCES = ("quadrature", "monte-carlo", "external")

FUNCTIONAL_IDS = ("F1", "F2", "F3", "F4")


@dataclass(frozen=True)
class ChordAtom:
    """One weighted chord: length, two boundary angles, mass."""

    ell: float
    alpha: float
    beta: float
    mass: float


@dataclass
class DiscreteMeasure:
    """Finitely supported measure on chords, stored as parallel arrays."""

    ell: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    mass: np.ndarray
    provenance: str = "quadrature"
    seed: int | None = None

    def __post_init__(self) -> None:
        self.ell = np.atleast_1d(np.asarray(self.ell, dtype=float))
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        self.mass = np.atleast_1d(np.asarray(self.mass, dtype=float))
        sizes = {self.ell.size, self.alpha.size, self.beta.size, self.mass.size}
        if len(sizes) != 1:
            raise ValueError(f"atom arrays must share a length, got sizes {sorted(sizes)}")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"provenance must be one of {_PROVENANCES}, got {self.provenance!r}")
        if not np.all(np.isfinite(self.ell)) or np.any(self.ell < 0):
            raise ValueError("chord lengths must be finite and >= 0")
        for name, ang in (("alpha", self.alpha), ("beta", self.beta)):
            if np.any(ang < 0) or np.any(ang > math.pi / 2):
                raise ValueError(f"{name} must lie in [0, pi/2]")
        if np.any(self.mass < 0) or not np.all(np.isfinite(self.mass)):
            raise ValueError("masses must be finite and >= 0")

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    @property
    def size(self) -> int:
        return int(self.mass.size)

    def atoms(self) -> list[ChordAtom]:
        return [
            ChordAtom(float(l), float(a), float(b), float(m))
            for l, a, b, m in zip(self.ell, self.alpha, self.beta, self.mass)
        ]

    @classmethod
    def from_atoms(
        cls, atoms, provenance: str = "external", seed: int | None = None
    ) -> "DiscreteMeasure":
        ell = [a.ell for a in atoms]
        alpha = [a.alpha for a in atoms]
        beta = [a.beta for a in atoms]
        mass = [a.mass for a in atoms]
        return cls(ell, alpha, beta, mass, provenance=provenance, seed=seed)

    def scaled(self, factor: float) -> "DiscreteMeasure":
        return DiscreteMeasure(
            self.ell, self.alpha, self.beta, self.mass * factor,
            provenance=self.provenance, seed=self.seed,
        )


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def ball_chord_density(ball: BallGeometry, ell) -> float | np.ndarray:
    """Length density of the chord measure of a round ball.

    rho(ell) = area * omega_{n-2} * T * T' * (1 - T^2)^((n-3)/2) on (0, 2r).
    For n = 2 the right endpoint is an integrable singularity (returned as
    inf); where the density vanishes the continuous extension 0 is used.
    """
    params = ball.params
    n, kappa, r = params.n, params.kappa, ball.radius
    arr = np.asarray(ell, dtype=float)
    scalar = arr.ndim == 0
    if np.any(arr <= 0) or np.any(arr >= 2.0 * r):
        raise ValueError("density is defined on the open interval (0, 2r)")
    T = chord_T(kappa, r, arr)
    Tp = chord_T_prime(kappa, r, arr)
    with np.errstate(divide="ignore"):
        val = ball.area * sphere_volume(n - 2) * T * Tp * (1.0 - T * T) ** ((n - 3) / 2.0)
    out = np.where(T >= 1.0, math.inf if n == 2 else 0.0, val)
    return float(out) if scalar else out


def discretize_ball_measure(ball: BallGeometry, n_nodes: int) -> DiscreteMeasure:
    """Quadrature discretization of the ball's chord measure.

    Gauss-Legendre in the boundary angle alpha on (0, pi/2) (the substituted
    variable in which every curve integrand is smooth), with atom lengths on
    the curve ell = chord_T_inverse(cos alpha) and masses
    w * area * delta_weight(alpha).
    """
    params = ball.params
    alpha, w = gauss_legendre(0.0, math.pi / 2.0, n_nodes)
    mass = w * ball.area * delta_weight(params.n, alpha)
    ell = chord_T_inverse(params.kappa, ball.radius, np.cos(alpha))
    order = np.argsort(ell)
    return DiscreteMeasure(
        ell[order], alpha[order], alpha[order], mass[order], provenance="quadrature"
    )


def sample_chords(ball: BallGeometry, n_samples: int, seed: int) -> DiscreteMeasure:
    """Monte Carlo draw from the normalized chord measure.

    Counter-based generator keyed by the seed, one vectorized block, so
    sample i depends only on (seed, i).  Angles follow the delta_weight
    marginal via inverse transform alpha = arcsin(u^(1/(n-1))); every atom
    carries mass total/n_samples.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    params = ball.params
    n = params.n
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random(n_samples)
    alpha = np.arcsin(u ** (1.0 / (n - 1)))
    ell = chord_T_inverse(params.kappa, ball.radius, np.cos(alpha))
    total = ball.area * sphere_volume(n - 2) / (n - 1)
    mass = np.full(n_samples, total / n_samples)
    return DiscreteMeasure(ell, alpha, alpha, mass, provenance="monte-carlo", seed=seed)


class SingularAtomError(ValueError):
    """An atom with positive mass sits where the integrand is infinite."""


def _sec_sum_checked(measure: DiscreteMeasure, need_alpha: bool, need_beta: bool):
    margin = 1e-12
    bad = np.zeros(measure.size, dtype=bool)
    if need_alpha:
        bad |= measure.alpha >= math.pi / 2 - margin
    if need_beta:
        bad |= measure.beta >= math.pi / 2 - margin
    bad &= measure.mass > 0
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise SingularAtomError(
            f"atom {idx} has a boundary angle at pi/2 with positive mass; "
            "the secant-weighted integrand is infinite there"
        )


def integrate(measure: DiscreteMeasure, functional, params: ModelParams) -> float:
    """Integrate one of the canonical chord functionals, or a callable f(alpha, beta).

    Canonical ids: F1 candle(ell)/(cos a cos b); F2 symmetrized
    candle_anti(ell)/2 * (sec a + sec b); F3 candle_anti2(ell); F4 ell.
    """
    if callable(functional):
        vals = functional(measure.alpha, measure.beta)
        return float(np.dot(measure.mass, vals))
    if functional == "F1":
        _sec_sum_checked(measure, True, True)
        vals = candle(params, measure.ell) / (np.cos(measure.alpha) * np.cos(measure.beta))
    elif functional == "F2":
        _sec_sum_checked(measure, True, True)
        vals = candle_anti(params, measure.ell) / 2.0 * (
            1.0 / np.cos(measure.alpha) + 1.0 / np.cos(measure.beta)
        )
    elif functional == "F3":
        vals = candle_anti2(params, measure.ell)
    elif functional == "F4":
        vals = measure.ell
    else:
        raise ValueError(f"unknown functional {functional!r}; expected one of {FUNCTIONAL_IDS} or a callable")
    return float(np.dot(measure.mass, vals))


def santalo_residual(ball: BallGeometry, measure: DiscreteMeasure) -> float:
    """integrate(ell) - omega_{n-1} * volume (0 for the exact chord measure)."""
    lhs = integrate(measure, "F4", ball.params)
    return lhs - sphere_volume(ball.params.n - 1) * ball.volume


def croke_residual(ball: BallGeometry, measure: DiscreteMeasure, which: int) -> float:
    """Defect of the three equalities satisfied by the ball's chord measure.

    which=1: integral F1 = area^2; which=2: integral F2 = area * volume;
    which=3: integral F3 = volume^2.
    """
    if which not in (1, 2, 3):
        raise ValueError(f"which must be 1, 2 or 3, got {which}")
    lhs = integrate(measure, f"F{which}", ball.params)
    rhs = {
        1: ball.area ** 2,
        2: ball.area * ball.volume,
        3: ball.volume ** 2,
    }[which]
    return lhs - rhs


_CSV_FIELDS = ("ell", "alpha", "beta", "mass")


def measure_to_csv(measure: DiscreteMeasure) -> str:
    """Serialize atoms as CSV with header ell,alpha,beta,mass."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for l, a, b, m in zip(measure.ell, measure.alpha, measure.beta, measure.mass):
        writer.writerow([repr(float(l)), repr(float(a)), repr(float(b)), repr(float(m))])
    return buf.getvalue()


def measure_from_csv(text: str, provenance: str = "external") -> DiscreteMeasure:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if [h.strip() for h in header] != list(_CSV_FIELDS):
        raise ValueError(f"expected header {','.join(_CSV_FIELDS)}, got {','.join(header)}")
    rows = [[float(x) for x in row] for row in reader if row]
    if not rows:
        raise ValueError("no atoms in CSV")
    arr = np.asarray(rows)
    return DiscreteMeasure(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], provenance=provenance)


def measure_to_json(measure: DiscreteMeasure) -> str:
    payload = {
        "schema": 1,
        "provenance": measure.provenance,
        "seed": measure.seed,
        "atoms": {
            "ell": measure.ell.tolist(),
            "alpha": measure.alpha.tolist(),
            "beta": measure.beta.tolist(),
            "mass": measure.mass.tolist(),
        },
    }
    return json.dumps(payload, sort_keys=True)


def measure_from_json(text: str) -> DiscreteMeasure:
    payload = json.loads(text)
    atoms = payload["atoms"]
    return DiscreteMeasure(
        atoms["ell"], atoms["alpha"], atoms["beta"], atoms["mass"],
        provenance=payload.get("provenance", "external"),
        seed=payload.get("seed"),
    )
