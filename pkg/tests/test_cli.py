"""Command line interface: exit codes, report shape, determinism, dilation."""

import json
import math

import pytest

from isoplp import __version__
from isoplp.cli import Dilation, RunConfig, UsageError, build_parser, main, make_dilation, run


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_flag_exits_2(capsys):
    code, out, err = run_cli(capsys, "certificate", "--dim", "4", "--kappa", "0", "--radius", "1", "--frobnicate")
    assert code == 2


def test_missing_subcommand_exits_2(capsys):
    code, out, err = run_cli(capsys)
    assert code == 2


def test_radius_volume_mutually_exclusive(capsys):
    code, out, err = run_cli(
        capsys, "certificate", "--dim", "2", "--kappa", "0", "--radius", "1", "--volume", "2"
    )
    assert code == 2


def test_certificate_flat_4ball(capsys):
    code, out, err = run_cli(capsys, "certificate", "--dim", "4", "--kappa", "0", "--radius", "1")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["tool"]["name"] == "isoplp"
    assert report["passed"] is True
    body = report["report"]
    assert body["consistency_fit"]["d"] == pytest.approx(12.0, rel=1e-8)
    assert body["reference"]["d"] == pytest.approx(12.0, rel=1e-12)
    assert body["reference_mismatch"] <= 1e-6
    assert body["verification"]["passed"] is True


def test_certificate_output_byte_identical(capsys):
    args = ("certificate", "--dim", "2", "--kappa", "-1", "--radius", "0.8")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_certificate_dilation_normalizes_curvature(capsys):
    # kappa=4 runs at kappa=1 with lengths halved; reported radius is the
    # user's, the normalized one sits next to it
    code, out, _ = run_cli(capsys, "certificate", "--dim", "2", "--kappa", "4", "--radius", "0.35")
    assert code == 0
    report = json.loads(out)
    assert report["config"]["kappa"] == 4.0
    body = report["report"]
    assert body["normalized"]["kappa"] == 1.0
    assert body["normalized"]["radius"] == pytest.approx(0.7, rel=1e-12)
    assert body["user_units"]["radius"] == pytest.approx(0.35, rel=1e-12)


def test_certificate_out_file(tmp_path, capsys):
    target = tmp_path / "cert.json"
    code, out, _ = run_cli(
        capsys, "certificate", "--dim", "4", "--kappa", "0", "--radius", "1", "--out", str(target)
    )
    assert code == 0
    assert out == ""
    report = json.loads(target.read_text())
    assert report["passed"] is True


def test_profile_csv_format(capsys):
    code, out, _ = run_cli(
        capsys,
        "profile", "--dim", "2", "--kappa", "0",
        "--vmin", "1", "--vmax", "2", "--steps", "3", "--format", "csv",
    )
    assert code == 0
    lines = [ln for ln in out.strip().splitlines() if ln]
    assert lines[0] == "V,radius,area"
    assert len(lines) == 4
    fields = [float(x) for x in lines[1].split(",")]
    assert fields[0] == pytest.approx(1.0)
    assert fields[2] == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-12)


def test_lp_flat_disk(capsys):
    code, out, _ = run_cli(
        capsys, "lp", "--dim", "2", "--kappa", "0", "--radius", "1", "--grid", "40x20"
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    entry = report["report"]["table1"]
    assert entry["status"] == "optimal"
    assert entry["optimum"] == pytest.approx(2.0 * math.pi, rel=1e-6)
    assert entry["relative_error"] <= 0.02
    assert entry["weak_duality"]["primal_violation"] <= 1e-9
    assert "total-length" in entry["dual"]


def test_lp_table2_quotient(capsys):
    code, out, _ = run_cli(
        capsys,
        "lp", "--table", "2", "--m", "2",
        "--dim", "2", "--kappa", "0", "--volume", "1.0", "--grid", "40x20",
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    body = report["report"]
    assert body["table2_rescaled"]["status"] == "optimal"
    assert body["table2_rescaled"]["relative_error"] <= 0.02
    assert "table2_printed_scaling" in body


def test_measure_check_deterministic_mc(capsys):
    args = (
        "measure-check", "--dim", "2", "--kappa", "1", "--radius", "0.8",
        "--mc-samples", "20000", "--seed", "7",
    )
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    report = json.loads(out1)
    assert report["passed"] is True
    assert abs(report["report"]["monte_carlo"]["z_score"]) <= 3.0


def test_measure_check_mc_needs_seed(capsys):
    code, out, err = run_cli(
        capsys, "measure-check", "--dim", "2", "--kappa", "0", "--radius", "1",
        "--mc-samples", "1000",
    )
    assert code == 2
    assert "seed" in err.lower()


def test_lemma_spherical(capsys):
    code, out, _ = run_cli(capsys, "lemma", "--case", "spherical", "--grid", "40", "--starts", "40")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    body = report["report"]
    assert body["min_H"] >= -1e-9
    assert body["factorization_max_residual"] <= 1e-10
    assert body["multistart"]["n_converged"] > 0
    assert len(body["critical_roots"]) > 0
    assert body["max_root_curve_distance"] <= 1e-6


def test_lemma_hyperbolic(capsys):
    code, out, _ = run_cli(capsys, "lemma", "--case", "hyperbolic", "--grid", "40", "--starts", "40")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert report["report"]["slope_sign_matches"] is True


def test_negbound_with_search(capsys):
    code, out, _ = run_cli(
        capsys, "negbound", "--radius", "0.7", "--search", "--ell-max", "10", "--r-max", "5"
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    body = report["report"]
    assert body["ch2_search"]["violated"] is True
    assert body["ch2_search"]["margin"] < 0.0
    assert abs(body["model_spectrum_margin"]) <= 1e-9
    assert "hyp2_convention" in body


def test_prince_shapes(capsys):
    code, out, _ = run_cli(capsys, "prince", "--shape", "disk", "--r", "1")
    assert code == 0
    report = json.loads(out)
    assert report["report"]["gravity"] == pytest.approx(0.5, abs=1e-10)

    code, out, _ = run_cli(capsys, "prince", "--shape", "ellipse", "--a", "2", "--b", "0.5")
    assert code == 0
    assert json.loads(out)["report"]["pp_margin"] == pytest.approx(0.1, abs=1e-9)

    code, out, _ = run_cli(capsys, "prince", "--shape", "square")
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_prince_csv_shape(tmp_path, capsys):
    path = tmp_path / "profile.csv"
    path.write_text("alpha,L\n-1.5,0.2\n0.0,2.0\n1.5,0.2\n")
    code, out, _ = run_cli(capsys, "prince", "--shape", "csv", "--csv", str(path))
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert report["report"]["pp_margin"] > 0.0


def test_prince_csv_requires_path(capsys):
    code, out, err = run_cli(capsys, "prince", "--shape", "csv")
    assert code == 2


def test_relative_command(capsys):
    code, out, _ = run_cli(
        capsys, "relative", "--m", "2", "--dim", "2", "--kappa", "0", "--volume", "1.5708"
    )
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert report["report"]["relative_bound"] == pytest.approx(
        2.0 * math.sqrt(math.pi * 2.0 * 1.5708) / 2.0, rel=1e-12
    )


def test_run_config_direct():
    code, report = run(
        RunConfig("certificate", {"dim": 4, "kappa": 0.0, "radius": 1.0})
    )
    assert code == 0
    assert report["passed"] is True
    assert report["command"] == "certificate"


def test_run_rejects_unknown_command():
    with pytest.raises(UsageError):
        run(RunConfig("frobnicate", {}))


def test_dilation_round_trip():
    d = make_dilation(2, 4.0)
    assert d.kappa_norm == 1.0
    assert d.length_to_norm(0.35) == pytest.approx(0.7, rel=1e-15)
    assert d.length_from_norm(d.length_to_norm(0.35)) == pytest.approx(0.35, rel=1e-15)
    assert d.volume_to_norm(1.0) == pytest.approx(4.0, rel=1e-15)
    assert d.volume_from_norm(d.volume_to_norm(2.2)) == pytest.approx(2.2, rel=1e-15)


def test_dilation_identity_for_unit_curvatures():
    for kappa in (-1.0, 0.0, 1.0):
        d = make_dilation(3, kappa)
        assert d.scale == 1.0
        assert d.length_to_norm(1.3) == 1.3


def test_dilation_negative_curvature():
    d = make_dilation(4, -0.25)
    assert d.kappa_norm == -1.0
    assert d.length_to_norm(2.0) == pytest.approx(1.0, rel=1e-15)
    assert d.volume_to_norm(16.0) == pytest.approx(16.0 * 0.25 ** 2, rel=1e-15)


def test_parser_help_lists_subcommands():
    parser = build_parser()
    help_text = parser.format_help()
    for name in ("profile", "certificate", "lp", "measure-check", "lemma", "negbound", "prince", "relative"):
        assert name in help_text
