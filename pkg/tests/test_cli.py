"""End-to-end tests of the command line front end.

Each test writes a small INI config into tmp_path, invokes run() in
process, and checks exit codes, report files, and stdout lines.  One
test goes through a real subprocess to cover the module entry point.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from cylwave.cli import run
from cylwave.grid import GridSpec, build_grid

SOLVE_CFG = """\
[grid]
N = 3
k = 3
r_max = 8.0
n_r = 64

[potential]
power_alpha = 2.0
power_coeff = 1.0

[nonlinearity]
Omega = 1.0
p = 3.0

[solve]
rho = 1.0
tol_residual = 1e-6
max_iters = 20000
"""

HYDROGEN_CFG = """\
[grid]
N = 3
k = 2
r_max = 6.0
n_r = 48
z_max = 3.0
n_z = 48

[hydrogen]
ell = 1.0
Omega = 1.5
p = 2.5

[solve]
rho = 2.0
tol_residual = 1e-5
max_iters = 30000
"""

CERTIFY_CFG = """\
[certify]
N = 3
k = 2
s0 = 6.5
radii = 1.0, 2.0
resolution = 8

[potential]
vortex_ell = 1.0

[nonlinearity]
Omega = 1.0
p = 3.0
"""

PROBE_CFG = """\
[grid]
N = 3
k = 2
r_max = 6.0
n_r = 64
z_max = 6.0
n_z = 96

[nonlinearity]
Omega = 1.0
p = 3.0

[probe]
r_center = 1.5
z_center = -1.5
r_width = 1.0
z_width = 1.0
separations = 0, 3.0
"""

CHECK_CFG = """\
[potential]
vortex_ell = 1.0

[nonlinearity]
Omega = 1.0
p = 3.0
"""


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _run(tmp_path, task, text, *extra, out="out"):
    path = _cfg(tmp_path, text)
    outdir = tmp_path / out
    rc = run([task, "--config", path, "--out", str(outdir), *extra])
    return rc, outdir


# ---------------------------------------------------------------------------
# solve


def test_solve_writes_reports_and_figures(tmp_path):
    rc, outdir = _run(tmp_path, "solve", SOLVE_CFG)
    assert rc == 0
    for name in ("result.json", "field.csv", "trace.csv", "field.png", "trace.png"):
        assert (outdir / name).exists()


def test_solve_no_plots_skips_figures(tmp_path):
    rc, outdir = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots")
    assert rc == 0
    assert (outdir / "result.json").exists()
    assert not (outdir / "field.png").exists()
    assert not (outdir / "trace.png").exists()


def test_result_json_schema(tmp_path):
    _, outdir = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots")
    payload = json.loads((outdir / "result.json").read_text())
    for key in ("rho", "lambda", "residual", "energy", "iters", "converged"):
        assert key in payload
    for key in ("kinetic", "potential", "nonlinear", "total"):
        assert key in payload["energy"]
    assert payload["task"] == "solve"
    assert payload["rho"] == 1.0
    assert payload["converged"] is True
    assert payload["status"] == "converged"
    assert payload["residual"] <= 1e-6 * payload["rho"]
    total = (
        payload["energy"]["kinetic"]
        + payload["energy"]["potential"]
        + payload["energy"]["nonlinear"]
    )
    assert payload["energy"]["total"] == pytest.approx(total, rel=1e-12)


def test_result_json_byte_identical_reruns(tmp_path):
    _, out1 = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots", out="out1")
    _, out2 = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots", out="out2")
    assert (out1 / "result.json").read_bytes() == (out2 / "result.json").read_bytes()
    assert (out1 / "field.csv").read_bytes() == (out2 / "field.csv").read_bytes()
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


def test_seed_override_still_converges(tmp_path):
    _, out1 = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots", out="out1")
    rc, out2 = _run(tmp_path, "solve", SOLVE_CFG, "--seed", "7", "--no-plots",
                    out="out2")
    assert rc == 0
    ref = json.loads((out1 / "result.json").read_text())
    alt = json.loads((out2 / "result.json").read_text())
    # Different initial noise, same ground state.
    assert alt["lambda"] == pytest.approx(ref["lambda"], abs=1e-4)
    assert alt["energy"]["total"] == pytest.approx(ref["energy"]["total"], abs=1e-6)


def test_field_csv_radial_roundtrip(tmp_path):
    _, outdir = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots")
    payload = json.loads((outdir / "result.json").read_text())
    lines = (outdir / "field.csv").read_text().splitlines()
    assert lines[0] == "r,u"
    data = np.loadtxt(outdir / "field.csv", delimiter=",", skiprows=1)
    grid = build_grid(GridSpec(N=3, k=3, r_max=8.0, n_r=64))
    np.testing.assert_allclose(data[:, 0], grid.r, rtol=1e-15)
    mass_sq = float(np.sum(grid.weights[:, 0] * data[:, 1] ** 2))
    assert mass_sq == pytest.approx(payload["mass"] ** 2, rel=1e-12)


def test_field_csv_cylindrical_z_major(tmp_path):
    _, outdir = _run(tmp_path, "hydrogen", HYDROGEN_CFG, "--no-plots")
    payload = json.loads((outdir / "result.json").read_text())
    lines = (outdir / "field.csv").read_text().splitlines()
    assert lines[0] == "r,z,u"
    assert len(lines) == 1 + 48 * 48
    data = np.loadtxt(outdir / "field.csv", delimiter=",", skiprows=1)
    grid = build_grid(GridSpec(N=3, k=2, r_max=6.0, n_r=48, z_max=3.0, n_z=48))
    # z varies slowest: the first block sweeps r at fixed z.
    np.testing.assert_allclose(data[:48, 1], np.full(48, grid.z[0]), rtol=1e-15)
    np.testing.assert_allclose(data[:48, 0], grid.r, rtol=1e-15)
    u = data[:, 2].reshape(48, 48).T
    mass_sq = float(np.sum(grid.weights * u**2))
    assert mass_sq == pytest.approx(payload["mass"] ** 2, rel=1e-12)


def test_trace_csv_matches_iters_and_is_monotone(tmp_path):
    _, outdir = _run(tmp_path, "solve", SOLVE_CFG, "--no-plots")
    payload = json.loads((outdir / "result.json").read_text())
    lines = (outdir / "trace.csv").read_text().splitlines()
    assert lines[0] == "iter,J,residual,dt"
    assert len(lines) == 1 + payload["iters"]
    trace = np.loadtxt(outdir / "trace.csv", delimiter=",", skiprows=1)
    assert np.array_equal(trace[:, 0], np.arange(1, payload["iters"] + 1))
    assert np.all(np.diff(trace[:, 1]) <= 1e-14)


def test_irrelevant_sections_are_ignored(tmp_path):
    text = SOLVE_CFG + "\n[probe]\nnot_even_a_key = 1\n"
    rc, _ = _run(tmp_path, "solve", text, "--no-plots")
    assert rc == 0


# ---------------------------------------------------------------------------
# exit codes


def test_exit_1_on_non_convergence(tmp_path):
    text = SOLVE_CFG.replace("max_iters = 20000", "max_iters = 3")
    rc, outdir = _run(tmp_path, "solve", text, "--no-plots")
    assert rc == 1
    payload = json.loads((outdir / "result.json").read_text())
    assert payload["converged"] is False
    assert payload["status"] == "max_iters"


def test_exit_2_on_unknown_key(tmp_path, capsys):
    text = SOLVE_CFG.replace("rho = 1.0", "rho = 1.0\nbogus = 2")
    rc, _ = _run(tmp_path, "solve", text, "--no-plots")
    assert rc == 2
    assert "solve.bogus: unknown key" in capsys.readouterr().err


def test_exit_2_on_supercritical_window(tmp_path, capsys):
    text = SOLVE_CFG.replace("p = 3.0", "p = 3.0\ngamma = 4.0")
    rc, _ = _run(tmp_path, "solve", text, "--no-plots")
    assert rc == 2
    assert "gamma" in capsys.readouterr().err


def test_exit_2_on_missing_section(tmp_path, capsys):
    text = SOLVE_CFG.replace("[nonlinearity]\nOmega = 1.0\np = 3.0\n", "")
    rc, _ = _run(tmp_path, "solve", text, "--no-plots")
    assert rc == 2
    assert "nonlinearity: required section is missing" in capsys.readouterr().err


def test_exit_3_on_malformed_config(tmp_path):
    rc, _ = _run(tmp_path, "solve", "not an ini\n[grid\n")
    assert rc == 3


def test_exit_3_on_missing_config():
    assert run(["solve", "--config", "/no/such/file.cfg"]) == 3


# ---------------------------------------------------------------------------
# certify


def test_certify_finds_witness(tmp_path):
    rc, outdir = _run(tmp_path, "certify", CERTIFY_CFG, "--no-plots")
    assert rc == 0
    payload = json.loads((outdir / "certify.json").read_text())
    assert payload["witness_found"] is True
    assert payload["R_star"] == 1.0
    assert payload["rho0"] == pytest.approx(42.0152, rel=1e-4)
    lines = (outdir / "trials.csv").read_text().splitlines()
    assert lines[0] == "R,energy,kinetic_radial,kinetic_axial,potential,nonlinear,mass"
    assert len(lines) == 3


def test_certify_without_witness_exits_1(tmp_path):
    text = CERTIFY_CFG.replace("s0 = 6.5", "s0 = 0.1")
    rc, outdir = _run(tmp_path, "certify", text, "--no-plots")
    assert rc == 1
    payload = json.loads((outdir / "certify.json").read_text())
    assert payload["witness_found"] is False
    assert "R_star" not in payload


def test_certify_renders_scaling_figure(tmp_path):
    rc, outdir = _run(tmp_path, "certify", CERTIFY_CFG)
    assert rc == 0
    assert (outdir / "scaling.png").exists()


# ---------------------------------------------------------------------------
# scan-sub


def test_scan_sub_all_strict(tmp_path):
    text = SOLVE_CFG + "\n[scan]\nmus = 0.6\n"
    rc, outdir = _run(tmp_path, "scan-sub", text, "--no-plots")
    assert rc == 0
    payload = json.loads((outdir / "scan.json").read_text())
    assert payload["all_strict"] is True
    (row,) = payload["rows"]
    for key in ("mu", "I_mu", "I_sqrt", "I_rho", "margin", "converged"):
        assert key in row
    assert row["converged"] is True
    assert row["margin"] > 0.0
    lines = (outdir / "subadditivity.csv").read_text().splitlines()
    assert lines[0] == "mu,I_mu,I_sqrt,I_rho,margin,converged"
    assert len(lines) == 2


def test_scan_sub_marks_non_converged_rows(tmp_path):
    text = SOLVE_CFG.replace("max_iters = 20000", "max_iters = 5")
    text += "\n[scan]\nmus = 0.6\n"
    rc, outdir = _run(tmp_path, "scan-sub", text, "--no-plots")
    assert rc == 1
    payload = json.loads((outdir / "scan.json").read_text())
    assert any(row["converged"] is False for row in payload["rows"])


def test_scan_sub_rejects_bad_mu(tmp_path, capsys):
    text = SOLVE_CFG + "\n[scan]\nmus = 0.6, 1.4\n"
    rc, _ = _run(tmp_path, "scan-sub", text, "--no-plots")
    assert rc == 2
    assert "scan.mus" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# probe-bl


def test_probe_bl_reports_defects(tmp_path, capsys):
    rc, outdir = _run(tmp_path, "probe-bl", PROBE_CFG, "--no-plots")
    assert rc == 0
    payload = json.loads((outdir / "probe.json").read_text())
    by_sep = {row["separation"]: row for row in payload["rows"]}
    assert by_sep[0.0]["overlapping"] is True
    assert abs(by_sep[0.0]["defect"]) > 1.0
    assert by_sep[3.0]["overlapping"] is False
    assert abs(by_sep[3.0]["defect"]) <= 1e-12
    lines = (outdir / "brezis_lieb.csv").read_text().splitlines()
    assert lines[0] == "separation,shift_cells,overlapping,defect"
    out = capsys.readouterr().out
    assert "probe-bl: sep=0" in out
    assert "probe-bl: sep=3" in out


def test_probe_bl_rejects_radial_grid(tmp_path):
    text = PROBE_CFG.replace("k = 2", "k = 3").replace("z_max = 6.0\nn_z = 96\n", "")
    rc, _ = _run(tmp_path, "probe-bl", text, "--no-plots")
    assert rc == 2


# ---------------------------------------------------------------------------
# check-hyp


def test_check_hyp_passes_on_vortex_model(tmp_path, capsys):
    rc, outdir = _run(tmp_path, "check-hyp", CHECK_CFG, "--no-plots")
    assert rc == 0
    out = capsys.readouterr().out
    assert "check-hyp: V.nonnegative: PASS" in out
    assert "FAIL" not in out
    payload = json.loads((outdir / "hypotheses.json").read_text())
    assert payload["all_ok"] is True
    assert payload["potential"]["checks"]["vanishes_at_infinity"] is True


def test_check_hyp_flags_supercritical_power(tmp_path, capsys):
    text = CHECK_CFG.replace("p = 3.0", "p = 4.0")
    rc, outdir = _run(tmp_path, "check-hyp", text, "--no-plots")
    assert rc == 1
    assert "check-hyp: W.gamma_window: FAIL" in capsys.readouterr().out
    payload = json.loads((outdir / "hypotheses.json").read_text())
    assert payload["all_ok"] is False


def test_check_hyp_hydrogen_positivity(tmp_path, capsys):
    rc, outdir = _run(tmp_path, "check-hyp", HYDROGEN_CFG, "--no-plots")
    assert rc == 0
    out = capsys.readouterr().out
    assert "check-hyp: hydrogen.effective_potential_nonnegative: PASS" in out
    payload = json.loads((outdir / "hypotheses.json").read_text())
    # inf V_eff = Omega - 1/(4 ell^2) = 1.25, sampled on cell centers.
    assert payload["hydrogen"]["data"]["v_eff_min"] == pytest.approx(1.25, abs=0.05)
    assert payload["hydrogen"]["data"]["v_eff_min"] >= 0.0


# ---------------------------------------------------------------------------
# hydrogen


def test_hydrogen_solves_and_reports(tmp_path):
    rc, outdir = _run(tmp_path, "hydrogen", HYDROGEN_CFG, "--no-plots")
    assert rc == 0
    payload = json.loads((outdir / "result.json").read_text())
    assert payload["task"] == "hydrogen"
    assert payload["converged"] is True
    assert payload["hydrogen"] == {"ell": 1.0, "Omega": 1.5, "p": 2.5}
    assert payload["v_eff_min"] >= 0.0


def test_hydrogen_rejects_small_omega(tmp_path, capsys):
    text = HYDROGEN_CFG.replace("Omega = 1.5", "Omega = 0.9")
    rc, _ = _run(tmp_path, "hydrogen", text, "--no-plots")
    assert rc == 2
    assert "Omega > 1" in capsys.readouterr().err


def test_hydrogen_rejects_radial_reduction(tmp_path, capsys):
    text = HYDROGEN_CFG.replace("k = 2", "k = 3")
    text = text.replace("z_max = 3.0\nn_z = 48\n", "")
    rc, _ = _run(tmp_path, "hydrogen", text, "--no-plots")
    assert rc == 2
    assert "k = 2" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# module entry point


def test_module_entry_point(tmp_path):
    path = _cfg(tmp_path, SOLVE_CFG)
    proc = subprocess.run(
        [sys.executable, "-m", "cylwave", "solve", "--config", path,
         "--out", str(tmp_path / "out"), "--no-plots"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "solve: status=converged" in proc.stdout
    assert (tmp_path / "out" / "result.json").exists()
