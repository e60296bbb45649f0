"""Diagnostics layer checks: trials, certification, scans, and probes."""

import math

import numpy as np
import pytest
from oracles import loglog_slope

from cylwave import (
    Field,
    GridSpec,
    NoWitnessError,
    NonlinearitySpec,
    PotentialSpec,
    SolveConfig,
    TrialSpec,
    brezis_lieb_probe,
    build_grid,
    certify_negative_infimum,
    coercivity_probe,
    compact_bump,
    energy,
    first_cell_ratio,
    fit_loglog_slope,
    l2_norm_sq,
    min0_trial,
    plateau_trial,
    scan_trial_energies,
    subadditivity_scan,
)

CUBIC = NonlinearitySpec(Omega=1.0, p=3.0)
FREE = PotentialSpec()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(s0=0.0, R_n=2.0, grid=GridSpec(N=3, k=3, r_max=8.0, n_r=64)),
        dict(s0=1.0, R_n=0.5, grid=GridSpec(N=3, k=3, r_max=8.0, n_r=64)),
        dict(s0=1.0, R_n=4.0, grid=GridSpec(N=3, k=3, r_max=8.0, n_r=64)),
        dict(s0=1.0, R_n=2.0, grid=GridSpec(N=3, k=3, r_max=8.0, n_r=16)),
        dict(
            s0=1.0,
            R_n=2.0,
            grid=GridSpec(N=3, k=2, r_max=8.0, n_r=64, z_max=1.0, n_z=16),
        ),
    ],
)
def test_trial_spec_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        TrialSpec(**kwargs)


def test_min0_trial_radial_profile():
    spec = TrialSpec(s0=2.0, R_n=2.0, grid=GridSpec(N=3, k=3, r_max=8.0, n_r=64))
    trial = min0_trial(spec)
    grid = trial.grid
    # Plateau r in [2, 4] carries the full height, outside [1, 5] is zero.
    plateau = (grid.r >= 2.0) & (grid.r <= 4.0)
    assert np.all(trial.values[plateau, 0] == 2.0)
    outside = (grid.r <= 1.0) | (grid.r >= 5.0)
    assert np.all(trial.values[outside, 0] == 0.0)
    # Hand value on the inner ramp: r = 1.5625 sits 0.5625 up the ramp.
    i = int(np.argmin(np.abs(grid.r - 1.5625)))
    assert trial.values[i, 0] == pytest.approx(2.0 * 0.5625, rel=1e-14)


def test_min0_trial_axial_tent():
    spec = TrialSpec(
        s0=1.0,
        R_n=1.0,
        grid=GridSpec(N=3, k=2, r_max=4.0, n_r=32, z_max=2.5, n_z=40),
    )
    trial = min0_trial(spec)
    grid = trial.grid
    i = int(np.argmin(np.abs(grid.r - 1.5)))
    j_mid = int(np.argmin(np.abs(grid.z)))
    # dz = 0.125, so 1.4375 is a cell center on the tent slope.
    j_slope = int(np.argmin(np.abs(grid.z - 1.4375)))
    assert trial.values[i, j_mid] == pytest.approx(1.0, rel=1e-14)
    assert trial.values[i, j_slope] == pytest.approx(0.5625, rel=1e-14)
    assert np.all(trial.values[:, np.abs(grid.z) >= 2.0] == 0.0)


def test_plateau_trial_sizes_box_to_support():
    trial = plateau_trial(3, 2, s0=1.0, R=3.0, resolution=8)
    assert trial.grid.spec.r_max == pytest.approx(8.0)
    assert trial.grid.spec.z_max == pytest.approx(2.5)
    assert l2_norm_sq(trial) > 0.0
    with pytest.raises(ValueError):
        plateau_trial(3, 2, s0=1.0, R=3.0, resolution=2)


def test_scan_rows_are_consistent():
    rows = scan_trial_energies(3, 3, FREE, CUBIC, s0=1.0, radii=[2.0, 4.0])
    assert [row.R for row in rows] == [2.0, 4.0]
    for row in rows:
        assert row.kinetic_axial == 0.0
        total = row.kinetic_radial + row.kinetic_axial + row.potential + row.nonlinear
        assert row.energy == pytest.approx(total, rel=1e-12)
    assert rows[1].mass > rows[0].mass


@pytest.mark.parametrize("N,k", [(3, 2), (3, 3)])
def test_trial_mass_scales_with_plateau_volume(N, k):
    radii = [8.0, 16.0, 32.0, 64.0]
    rows = scan_trial_energies(N, k, FREE, CUBIC, s0=1.0, radii=radii)
    slope = loglog_slope(radii, [row.mass**2 for row in rows])
    assert k - 0.2 < slope < k + 0.2


@pytest.mark.parametrize("N,k", [(3, 2), (3, 3)])
def test_trial_radial_kinetic_scales_like_plateau_edge(N, k):
    radii = [8.0, 16.0, 32.0, 64.0]
    rows = scan_trial_energies(N, k, FREE, CUBIC, s0=1.0, radii=radii)
    slope = loglog_slope(radii, [row.kinetic_radial for row in rows])
    assert k - 1.2 < slope < k - 0.8


def test_certify_finds_vortex_witness():
    pot = PotentialSpec(vortex_ell=1.0)
    nl = NonlinearitySpec(Omega=1.0, p=3.0)
    cert = certify_negative_infimum(3, 2, pot, nl, s0=6.5, radii=[1.0, 2.0, 4.0])
    assert cert.R_star == 1.0
    assert cert.rho0 == pytest.approx(math.sqrt(l2_norm_sq(cert.witness)), rel=1e-12)
    assert cert.rho0 == pytest.approx(42.0152, rel=1e-4)
    neg_row = [row for row in cert.rows if row.R == cert.R_star][0]
    assert neg_row.energy < 0.0
    v_vals = (1.0 / cert.witness.grid.r[:, None] ** 2) * np.ones(
        cert.witness.grid.shape
    )
    assert energy(cert.witness, v_vals, nl).total == pytest.approx(
        neg_row.energy, rel=1e-12
    )


def test_certify_raises_without_witness():
    with pytest.raises(NoWitnessError, match="closest"):
        certify_negative_infimum(
            3, 2, PotentialSpec(vortex_ell=1.0), NonlinearitySpec(Omega=2.0, p=3.0),
            s0=0.1, radii=[1.0, 2.0],
        )


def test_fit_loglog_slope_recovers_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    y = 3.0 * x**2.5
    slope, intercept = fit_loglog_slope(x, y)
    assert slope == pytest.approx(2.5, rel=1e-12)
    assert intercept == pytest.approx(math.log(3.0), rel=1e-12)
    assert slope == pytest.approx(loglog_slope(x, y), rel=1e-12)


def test_fit_loglog_slope_rejects_bad_data():
    with pytest.raises(ValueError):
        fit_loglog_slope([1.0], [2.0])
    with pytest.raises(ValueError):
        fit_loglog_slope([1.0, 2.0], [1.0, -1.0])


def test_subadditivity_scan_strict_for_attractive_cubic(radial_grid):
    v = radial_grid.r[:, None] ** 2 * np.ones(radial_grid.shape)
    cfg = SolveConfig(rho=1.0, tol_residual=1e-7)
    report = subadditivity_scan(radial_grid, v, CUBIC, 1.0, [0.6], cfg)
    assert report.all_strict
    assert set(report.solves) == {"rho", "mu=0.6", "comp=0.8"}
    row = report.rows[0]
    assert row.converged
    assert row.margin > 0.0
    assert row.margin == pytest.approx(
        row.energy_mu + row.energy_comp - row.energy_rho, rel=1e-12
    )
    assert report.margin_floor == pytest.approx(
        1e-4 * abs(report.energy_rho), rel=1e-12
    )


def test_subadditivity_scan_rejects_bad_mu(radial_grid):
    v = radial_grid.r[:, None] ** 2 * np.ones(radial_grid.shape)
    cfg = SolveConfig(rho=1.0)
    with pytest.raises(ValueError):
        subadditivity_scan(radial_grid, v, CUBIC, 1.0, [1.5], cfg)


def test_subadditivity_unconverged_rows_do_not_certify(radial_grid):
    v = radial_grid.r[:, None] ** 2 * np.ones(radial_grid.shape)
    cfg = SolveConfig(rho=1.0, tol_residual=1e-12, max_iters=2)
    report = subadditivity_scan(radial_grid, v, CUBIC, 1.0, [0.6], cfg)
    assert not report.rows[0].converged
    assert not report.all_strict


def test_compact_bump_has_exact_support(cyl_grid):
    bump = compact_bump(cyl_grid, r_center=2.0, z_center=0.0, r_width=1.0,
                        z_width=1.0, amplitude=2.0)
    rr = cyl_grid.r[:, None]
    zz = cyl_grid.z[None, :]
    q2 = (rr - 2.0) ** 2 + zz**2
    assert np.all(bump.values[q2 >= 1.0] == 0.0)
    assert np.all(bump.values[q2 < 1.0] > 0.0)
    assert float(np.max(bump.values)) <= 2.0
    with pytest.raises(ValueError):
        compact_bump(cyl_grid, 2.0, 0.0, 0.0, 1.0)


def test_brezis_lieb_defect_vanishes_once_disjoint(cyl_grid):
    bump = compact_bump(cyl_grid, r_center=2.0, z_center=-1.5, r_width=0.8,
                        z_width=0.8)
    rows = brezis_lieb_probe(bump, [0.0, 0.5, 3.0], CUBIC)
    assert rows[0].overlapping
    assert rows[0].defect < 0.0
    assert rows[1].overlapping
    assert not rows[2].overlapping
    scale = abs(rows[0].defect)
    assert abs(rows[2].defect) <= 1e-12 * max(scale, 1.0)


def test_brezis_lieb_needs_axial_direction(gaussian_radial):
    with pytest.raises(ValueError):
        brezis_lieb_probe(gaussian_radial, [1.0], CUBIC)


def _width_family(grid, widths, rho):
    fields = []
    for w in widths:
        vals = np.exp(-((grid.r[:, None] ** 2 + grid.z[None, :] ** 2) / w**2))
        mass = float(np.sum(grid.weights * vals**2))
        fields.append(Field(grid, vals * (rho / math.sqrt(mass))))
    return fields


def test_coercivity_probe_subcritical_family(cyl_grid):
    fields = _width_family(cyl_grid, [0.4, 0.8, 1.6], rho=1.0)
    report = coercivity_probe(FREE, CUBIC, fields)
    assert report.all_ok
    assert report.min_slack >= 0.0
    assert report.c_emp > 0.0
    assert len(report.rows) == 3
    # Mass subcritical growth keeps the raw energies bounded below.
    assert min(row.energy for row in report.rows) > -10.0


def test_coercivity_probe_supercritical_negative_control(cyl_grid):
    # Needs enough mass for the quartic term to beat the kinetic term as
    # the profile narrows; at rho=1 the family still looks coercive.
    quartic = NonlinearitySpec(Omega=1.0, p=4.0)
    fields = _width_family(cyl_grid, [1.6, 0.8, 0.4, 0.2], rho=3.0)
    report = coercivity_probe(FREE, quartic, fields)
    energies = [row.energy for row in report.rows]
    assert energies[-1] < energies[0]
    assert energies[-1] < 0.0
    assert report.min_slack >= 0.0


def test_coercivity_probe_rejects_bad_input(cyl_grid):
    fields = _width_family(cyl_grid, [0.5], rho=1.0)
    with pytest.raises(ValueError):
        coercivity_probe(FREE, CUBIC, [])
    with pytest.raises(ValueError):
        coercivity_probe(-np.ones(cyl_grid.shape), CUBIC, fields)
    mixed = fields + _width_family(cyl_grid, [0.7], rho=2.0)
    with pytest.raises(ValueError):
        coercivity_probe(FREE, CUBIC, mixed)


def test_first_cell_ratio_flags_axis_mass(cyl_grid):
    flat = Field(cyl_grid, np.ones(cyl_grid.shape))
    assert first_cell_ratio(flat) == 1.0
    vortexy = Field(
        cyl_grid,
        cyl_grid.r[:, None] ** 2 * np.exp(-cyl_grid.r[:, None] ** 2)
        * np.exp(-cyl_grid.z[None, :] ** 2),
    )
    assert first_cell_ratio(vortexy) <= 1e-2
    zero = Field(cyl_grid, np.zeros(cyl_grid.shape))
    assert first_cell_ratio(zero) == 0.0
