"""Command line front end.

Every verification in the package is exposed as a subcommand that emits a
machine-readable report (JSON by default, CSV for tables).  Reports embed
the configuration, tool version and tolerances, contain no timestamps, and
are byte-identical across runs with the same arguments and seed.

Exit codes: 0 all checks passed, 1 a verification failed, 2 usage error.

Curvatures outside {-1, 0, 1} are handled by the dilation that rescales
them to unit size (lengths scale by sqrt|kappa|, volumes by |kappa|^(n/2));
reports then carry both normalized and user-unit values.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, certificate, chordmeasure, lemmas, littleprince, lpcore, negbound, relative
from .spaceform import (
    ModelParams,
    ball_from_radius,
    ball_from_volume,
    max_ball_volume,
    sphere_volume,
)

__all__ = ["RunConfig", "run", "main", "build_parser"]


@dataclass(frozen=True)
class RunConfig:
    """Parsed arguments for one CLI run."""

    command: str
    options: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.options.get(key, default)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# curvature normalization


@dataclass(frozen=True)
class Dilation:
    """Rescaling of (n, kappa) to unit curvature size: lengths *= scale."""

    n: int
    kappa_user: float
    kappa_norm: float
    scale: float  # sqrt(|kappa|) or 1

    def length_to_norm(self, x: float) -> float:
        return x * self.scale

    def length_from_norm(self, x: float) -> float:
        return x / self.scale

    def volume_to_norm(self, v: float) -> float:
        return v * self.scale ** self.n

    def volume_from_norm(self, v: float) -> float:
        return v / self.scale ** self.n

    def area_from_norm(self, a: float) -> float:
        return a / self.scale ** (self.n - 1)


def make_dilation(n: int, kappa: float) -> Dilation:
    if kappa in (-1.0, 0.0, 1.0):
        return Dilation(n, kappa, kappa, 1.0)
    scale = math.sqrt(abs(kappa))
    return Dilation(n, kappa, math.copysign(1.0, kappa), scale)


# ---------------------------------------------------------------------------
# report plumbing


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _report_shell(config: RunConfig, tolerances: dict, body: dict, passed: bool) -> dict:
    return {
        "schema": 1,
        "tool": {"name": "isoplp", "version": __version__},
        "command": config.command,
        "config": _sanitize(config.options),
        "tolerances": _sanitize(tolerances),
        "passed": bool(passed),
        "report": _sanitize(body),
    }


def _emit(report: dict, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        rows = report.get("report", {}).get("rows")
        lines = []
        if isinstance(rows, list) and rows and isinstance(rows[0], dict):
            cols = list(rows[0].keys())
            lines.append(",".join(cols))
            for row in rows:
                lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols))
        else:
            lines.append("key,value")
            flat = _flatten(report)
            for k in sorted(flat):
                lines.append(f"{k},{flat[k]}")
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flatten(obj, prefix=""):
    flat = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            flat.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            flat.update(_flatten(v, f"{prefix}{i}."))
    else:
        flat[prefix[:-1]] = obj
    return flat


def _resolve_radius_volume(params: ModelParams, radius, volume):
    if (radius is None) == (volume is None):
        raise UsageError("exactly one of --radius/--volume is required")
    if radius is not None:
        ball = ball_from_radius(params, radius)
    else:
        ball = ball_from_volume(params, volume)
    return ball


# ---------------------------------------------------------------------------
# subcommands


def _cmd_profile(config: RunConfig):
    n = config.get("dim")
    kappa = config.get("kappa")
    params = ModelParams(n, kappa)
    vmin, vmax, steps = config.get("vmin"), config.get("vmax"), config.get("steps")
    if not (0 < vmin <= vmax) or steps < 1:
        raise UsageError("need 0 < vmin <= vmax and steps >= 1")
    if kappa > 0 and vmax > max_ball_volume(params):
        raise UsageError(f"vmax exceeds the hemisphere volume {max_ball_volume(params)}")
    vols = np.linspace(vmin, vmax, steps)
    rows = []
    for v in vols:
        ball = ball_from_volume(params, float(v))
        rows.append({"V": float(v), "radius": ball.radius, "area": ball.area})
    return {"rows": rows}, {}, True


def _cmd_certificate(config: RunConfig):
    n = config.get("dim")
    dil = make_dilation(n, config.get("kappa"))
    params = ModelParams(n, dil.kappa_norm)
    radius, volume = config.get("radius"), config.get("volume")
    if radius is not None:
        radius = dil.length_to_norm(radius)
    if volume is not None:
        volume = dil.volume_to_norm(volume)
    ball = _resolve_radius_volume(params, radius, volume)
    r = ball.radius
    grid = config.get("grid") or 80

    fit = certificate.solve_consistency(params, r)
    body = {
        "normalized": {"kappa": dil.kappa_norm, "radius": r, "dilation_scale": dil.scale},
        "user_units": {"kappa": dil.kappa_user, "radius": dil.length_from_norm(r)},
        "consistency_fit": {
            "a": fit.a, "b": fit.b, "c": fit.c, "d": fit.d, "residual": fit.residual,
        },
    }
    passed = fit.residual <= 1e-8 * max(1.0, abs(fit.d))
    try:
        cert = certificate.paper_certificate(params, r)
    except ValueError:
        cert = None
        body["reference"] = None
    if cert is not None:
        ref = dict(zip("abcd", cert.coefficients))
        coeff_scale = max(abs(v) for v in cert.coefficients)
        mismatch = max(abs(getattr(fit, k) - ref[k]) for k in "abcd") / coeff_scale
        require_nonneg = params.kappa >= 0.0
        report = certificate.verify_certificate(cert, grid=grid, require_nonneg=require_nonneg)
        body["reference"] = ref
        body["reference_mismatch"] = mismatch
        body["verification"] = {
            "consistency_residual": report.consistency_residual,
            "curve_sup_deviation": report.curve_sup_deviation,
            "membership_min_f": report.membership.min_f,
            "membership_min_defect": report.membership.min_defect,
            "negative_coefficients": list(report.negative_coefficients),
            "nonneg_required": report.nonneg_required,
            "passed": report.passed,
        }
        passed = passed and mismatch <= 1e-6 and report.passed
    tols = {"consistency": 1e-8, "reference_match": 1e-6, "membership_defect": 1e-9}
    return body, tols, passed


def _default_family(params: ModelParams, r: float):
    fam = list(lpcore.product_family())
    try:
        cert = certificate.paper_certificate(params, r)
    except ValueError:
        return fam
    fam.append(("certificate-sup", lambda a, b: certificate.evaluate_f(cert, a, b)[0]))
    return fam


def _cmd_lp(config: RunConfig):
    n = config.get("dim")
    dil = make_dilation(n, config.get("kappa"))
    params = ModelParams(n, dil.kappa_norm)
    radius, volume = config.get("radius"), config.get("volume")
    if radius is not None:
        radius = dil.length_to_norm(radius)
    if volume is not None:
        volume = dil.volume_to_norm(volume)
    ball = _resolve_radius_volume(params, radius, volume)
    V = ball.volume
    table = config.get("table") or 1
    m = config.get("m") or 1
    n_ell, n_alpha = config.get("grid") or (40, 20)
    grid = lpcore.GridSpec(n_ell=n_ell, n_alpha=n_alpha)
    tol = config.get("tol") or 0.02

    body = {
        "normalized": {"kappa": dil.kappa_norm, "volume": V, "dilation_scale": dil.scale},
        "grid": {"n_ell": n_ell, "n_alpha": n_alpha},
    }

    def solve_one(lp, bound, label):
        sol = lpcore.solve(lp)
        entry = {
            "status": sol.status,
            "optimum": sol.objective_value,
            "bound": bound,
            "bound_user_units": dil.area_from_norm(bound),
            "duality_gap": sol.duality_gap,
        }
        ok = sol.status == "optimal"
        if ok:
            entry["relative_error"] = abs(sol.objective_value - bound) / bound
            entry["dual"] = dict(zip(lp.row_labels, sol.dual.tolist()))
            check = lpcore.verify_weak_duality(lp, sol.primal, sol.dual)
            entry["weak_duality"] = {
                "gap": check.gap,
                "primal_violation": check.primal_violation,
                "dual_violation": check.dual_violation,
            }
            ok = entry["relative_error"] <= tol
        body[label] = entry
        return ok

    if table == 1:
        fam = _default_family(params, ball.radius)
        lp = lpcore.build_isoperimetric_lp(params, V, grid, fam)
        passed = solve_one(lp, ball.area, "table1")
    else:
        case = relative.RelativeCase(params, m, V)
        ball0 = ball_from_volume(params, m * V)
        fam = _default_family(params, ball0.radius)
        bound = relative.relative_bound(case)
        ok1 = solve_one(
            lpcore.build_relative_lp(params, V, m, grid, fam, variant="rescaled"), bound, "table2_rescaled"
        )
        lp_printed = lpcore.build_relative_lp(params, V, m, grid, fam, variant="printed")
        sol_printed = lpcore.solve(lp_printed)
        body["table2_printed_scaling"] = {
            "status": sol_printed.status,
            "optimum": sol_printed.objective_value,
            "bound": bound,
        }
        passed = ok1
    return body, {"relative_error": tol, "solver": 1e-9}, passed


def _cmd_measure_check(config: RunConfig):
    params = ModelParams(config.get("dim"), config.get("kappa"))
    ball = _resolve_radius_volume(params, config.get("radius"), config.get("volume"))
    n_nodes = config.get("grid") or 128
    tol = config.get("tol") or 1e-7
    measure = chordmeasure.discretize_ball_measure(ball, n_nodes)
    omega = sphere_volume(params.n - 1)
    santalo_rel = chordmeasure.santalo_residual(ball, measure) / (omega * ball.volume)
    croke_rel = {}
    rhs = {1: ball.area ** 2, 2: ball.area * ball.volume, 3: ball.volume ** 2}
    for which in (1, 2, 3):
        croke_rel[f"croke{which}"] = chordmeasure.croke_residual(ball, measure, which) / rhs[which]
    passed = abs(santalo_rel) <= tol and all(abs(v) <= tol for v in croke_rel.values())
    body = {
        "ball": {"radius": ball.radius, "volume": ball.volume, "area": ball.area},
        "quadrature_nodes": n_nodes,
        "santalo_relative": santalo_rel,
        "croke_relative": croke_rel,
    }
    mc_n = config.get("mc_samples")
    if mc_n:
        seed = config.get("seed")
        if seed is None:
            raise UsageError("--seed is required with --mc-samples")
        sample = chordmeasure.sample_chords(ball, mc_n, seed)
        est = chordmeasure.integrate(sample, "F4", params)
        exact = omega * ball.volume
        se = sample.total_mass * float(np.std(sample.ell, ddof=1)) / math.sqrt(mc_n)
        z = (est - exact) / se
        body["monte_carlo"] = {
            "samples": mc_n,
            "seed": seed,
            "santalo_estimate": est,
            "santalo_exact": exact,
            "standard_error": se,
            "z_score": z,
        }
        passed = passed and abs(z) <= 3.0
    return body, {"relative": tol, "mc_z": 3.0}, passed


def _cmd_lemma(config: RunConfig):
    case = config.get("case")
    grid = config.get("grid") or 120
    starts = config.get("starts") or 1000
    seed = config.get("seed") or 0
    report = lemmas.verify_H_nonneg(case, grid)
    system = lemmas.critical_system(case)
    roots = lemmas.solve_critical_points(system, n_starts=starts, seed=seed)
    max_curve_dist = max((r.curve_distance for r in roots), default=0.0)
    rng = np.random.Generator(np.random.Philox(key=seed))
    pts = rng.random((10000, 2)) * 5.0
    if case == "spherical":
        fact = lemmas.check_factorization(pts[:, 0], pts[:, 1], relative=True)
        fact_ok = bool(np.max(np.abs(fact)) <= 1e-10)
        extra = {"factorization_max_residual": float(np.max(np.abs(fact)))}
        dgdp = [lemmas.dGdp_identity(p) for p in (1.0, 2.0)]
        extra["dGdp"] = [
            {"p": c.p, "closed": c.closed, "fd": c.fd, "residual": c.residual} for c in dgdp
        ]
        dgdp_ok = all(abs(c.residual) <= 1e-5 * (1 + abs(c.closed)) for c in dgdp)
    else:
        t = pts[:, 0] % 0.98 + 0.01
        p = 1.0 / 3.0 + pts[:, 1]
        match = lemmas.hyperbolic_slope_sign_matches(t, p)
        fact_ok = bool(np.all(match))
        extra = {"slope_sign_matches": fact_ok}
        dgdp_ok = True
    body = {
        "case": case,
        "min_H": report.min_value,
        "argmin": list(report.argmin),
        "argmin_curve_distance": report.argmin_curve_distance,
        "grid_shape": list(report.grid_shape),
        "rays": [{"label": r.label, "tail_min": r.tail_min, "passed": r.passed} for r in report.rays],
        "critical_roots": [
            {
                "t": r.t, "p": r.p, "q": r.q,
                "residual": r.residual,
                "curve_distance": r.curve_distance,
                "merged_starts": r.n_merged,
            }
            for r in roots
        ],
        "multistart": {
            "n_starts": roots.n_starts,
            "n_converged": roots.n_converged,
            "n_singular": roots.n_singular,
            "n_stalled": roots.n_stalled,
            "n_out_of_domain": roots.n_out_of_domain,
            "n_degenerate": roots.n_degenerate,
        },
        "max_root_curve_distance": max_curve_dist,
    }
    body.update(extra)
    passed = report.passed and max_curve_dist <= 1e-6 and fact_ok and dgdp_ok and len(roots) > 0
    tols = {"min_H": -1e-9, "root_curve_distance": 1e-6, "factorization": 1e-10, "dGdp": 1e-5}
    return body, tols, passed


def _cmd_negbound(config: RunConfig):
    r = config.get("radius")
    if r is None:
        raise UsageError("--radius is required")
    n_nodes = config.get("grid") or 128
    tol = config.get("tol") or 1e-7

    small = negbound.smallness_ok(negbound.SmallnessInput(-1.0, r, r))
    ball4 = ball_from_radius(ModelParams(4, -1.0), r)
    meas4 = chordmeasure.discretize_ball_measure(ball4, n_nodes)
    conj = negbound.conjecture_residual(r, meas4) / negbound.conjecture_rhs(r)
    ball2 = ball_from_radius(ModelParams(2, -1.0), r)
    meas2 = chordmeasure.discretize_ball_measure(ball2, n_nodes)
    rhs2 = ball2.area * ball2.volume - math.tanh(r) * ball2.volume ** 2
    hyp2 = negbound.hyp2_lemma_residual(r, meas2) / rhs2
    body = {
        "radius": r,
        "smallness": {"product": small.product, "margin": small.margin, "ok": small.ok},
        "conjecture_relative_residual": conj,
        "hyp2_relative_residual": hyp2,
        "hyp2_convention": "rhs = A*V - tanh(r)*V^2 (chord normalization with total length omega_1*V)",
    }
    passed = abs(conj) <= tol and abs(hyp2) <= tol
    if config.get("search"):
        res = negbound.ch2_counterexample_search(
            config.get("ell_max") or 10.0, config.get("r_max") or 5.0
        )
        zero = negbound.question1_margin(
            negbound.CurvatureSpectrum((-1.0, -1.0, -1.0)), res.r, min(res.ell, 3.0)
        )
        body["ch2_search"] = {
            "r": res.r, "ell": res.ell, "margin": res.margin, "violated": res.violated,
        }
        body["model_spectrum_margin"] = zero
        passed = passed and res.violated and abs(zero) <= 1e-9
    return body, {"relative": tol}, passed


def _cmd_prince(config: RunConfig):
    shape = config.get("shape")
    if shape == "disk":
        dom = littleprince.disk(config.get("r") or 1.0)
    elif shape == "ellipse":
        dom = littleprince.ellipse(config.get("a") or 2.0, config.get("b") or 0.5)
    elif shape == "square":
        dom = littleprince.square_side_midpoint()
    elif shape == "csv":
        path = config.get("csv")
        if not path:
            raise UsageError("--csv PATH is required for --shape csv")
        with open(path) as fh:
            dom = littleprince.from_csv(fh.read())
    else:
        raise UsageError(f"unknown shape {shape!r}")
    g = littleprince.gravity(dom)
    a = littleprince.area(dom)
    margin = littleprince.verify_pp(dom)
    body = {
        "shape": dom.tag,
        "gravity": g,
        "area": a,
        "disk_gravity_same_area": littleprince.disk_gravity(a),
        "pp_margin": margin,
        "dual_chain_bound": littleprince.dual_chain_bound(a),
        "weil_perimeter_bound": littleprince.weil_bound(a),
    }
    return body, {"pp_margin": -1e-10}, margin >= -1e-10


def _cmd_relative(config: RunConfig):
    params = ModelParams(config.get("dim"), config.get("kappa"))
    V = config.get("volume")
    if V is None:
        raise UsageError("--volume is required")
    m = config.get("m") or 1
    n_nodes = config.get("grid") or 128
    tol = config.get("tol") or 1e-7
    case = relative.RelativeCase(params, m, V)
    bound = relative.relative_bound(case)
    report = relative.verify_relative_equality(case, n_nodes)
    body = {
        "m": m,
        "volume": V,
        "relative_bound": bound,
        "equality_residuals": {
            "F1": report.f1_residual,
            "F2": report.f2_residual,
            "F3": report.f3_residual,
        },
    }
    if m == 1:
        body["m1_matches_ball_area"] = abs(bound - ball_from_volume(params, V).area)
    return body, {"relative": tol}, report.passed(tol)


_COMMANDS = {
    "profile": _cmd_profile,
    "certificate": _cmd_certificate,
    "lp": _cmd_lp,
    "measure-check": _cmd_measure_check,
    "lemma": _cmd_lemma,
    "negbound": _cmd_negbound,
    "prince": _cmd_prince,
    "relative": _cmd_relative,
}


def run(config: RunConfig) -> tuple[int, dict]:
    """Execute one configured command; returns (exit code, report dict)."""
    handler = _COMMANDS.get(config.command)
    if handler is None:
        raise UsageError(f"unknown command {config.command!r}")
    try:
        body, tols, passed = handler(config)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = _report_shell(config, tols, body, passed)
    return (0 if passed else 1), report


def _add_common(p, *, dim=False, kappa=False, rv=False, grid_int=False):
    if dim:
        p.add_argument("--dim", type=int, required=True, help="dimension n >= 2")
    if kappa:
        p.add_argument("--kappa", type=float, required=True, help="curvature bound")
    if rv:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--radius", type=float)
        g.add_argument("--volume", type=float)
    if grid_int:
        p.add_argument("--grid", type=int, help="grid size / node count")
    p.add_argument("--tol", type=float, help="tolerance override")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write the report to this path instead of stdout")


def _parse_grid_pair(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except Exception as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 40x20, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoplp",
        description="Verification toolkit for isoperimetric LP bounds on model spaces",
    )
    parser.add_argument("--version", action="version", version=f"isoplp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="tabulate ball area against volume")
    p.add_argument("--vmin", type=float, required=True)
    p.add_argument("--vmax", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _add_common(p, dim=True, kappa=True)

    p = sub.add_parser("certificate", help="reconstruct and verify a dual certificate")
    _add_common(p, dim=True, kappa=True, rv=True, grid_int=True)

    p = sub.add_parser("lp", help="build and solve the finite LP")
    p.add_argument("--table", type=int, choices=(1, 2), default=1)
    p.add_argument("--m", type=int, default=1, help="multiplicity (table 2)")
    p.add_argument("--grid", type=_parse_grid_pair, help="ell x alpha node counts, e.g. 40x20")
    _add_common(p, dim=True, kappa=True, rv=True)

    p = sub.add_parser("measure-check", help="chord-measure integral identities")
    p.add_argument("--mc-samples", type=int, dest="mc_samples")
    p.add_argument("--seed", type=int)
    _add_common(p, dim=True, kappa=True, rv=True, grid_int=True)

    p = sub.add_parser("lemma", help="polynomial nonnegativity verification")
    p.add_argument("--case", choices=lemmas.CASES, required=True)
    p.add_argument("--starts", type=int, help="Newton multistart count")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, grid_int=True)

    p = sub.add_parser("negbound", help="negative-curvature inequalities")
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--search", action="store_true", help="run the counterexample search")
    p.add_argument("--ell-max", type=float, dest="ell_max")
    p.add_argument("--r-max", type=float, dest="r_max")
    _add_common(p, grid_int=True)

    p = sub.add_parser("prince", help="planar gravity of a star-shaped domain")
    p.add_argument("--shape", choices=("disk", "ellipse", "square", "csv"), required=True)
    p.add_argument("--r", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--csv", help="CSV path with header alpha,L")
    _add_common(p)

    p = sub.add_parser("relative", help="multiplicity-m relative bound")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--volume", type=float, required=True)
    _add_common(p, dim=True, kappa=True, grid_int=True)

    return parser


def main(argv=None) -> int:
    threads = os.environ.get("ISOPLP_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    options = {k: v for k, v in vars(args).items() if k not in ("command",) and v is not None}
    fmt = options.pop("format", "json")
    out = options.pop("out", None)
    config = RunConfig(command=args.command, options=options)
    try:
        code, report = run(config)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    _emit(report, fmt, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
