"""Variational diagnostics built on top of the solver.

Four independent lines of evidence about the minimization problem live
here:

* plateau trial states whose energy certifies that the infimum on large
  spheres is negative, which rules out the vanishing branch,
* strict subadditivity scans of the ground energy as a function of mass,
  the quantitative input behind compactness of minimizing sequences,
* a splitting probe that measures the nonlinear defect of two bumps as
  they separate, zero for disjoint supports by locality,
* an empirical coercivity check that holds each probe field against the
  lower bound chain built from the growth witnesses of the nonlinearity
  and an empirically calibrated embedding constant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .energy import energy
from .grid import (
    Field,
    Grid,
    GridSpec,
    build_grid,
    kinetic_energy_split,
    l2_norm_sq,
    translate_z,
)
from .model import NonlinearitySpec, PotentialSpec, eval_R, potential_on_grid
from .solver import SolveConfig, SolveResult, solve

logger = logging.getLogger(__name__)

__all__ = [
    "NoWitnessError",
    "TrialSpec",
    "TrialRow",
    "CertifyResult",
    "SubadditivityRow",
    "SubadditivityReport",
    "BrezisLiebRow",
    "CoercivityRow",
    "CoercivityReport",
    "min0_trial",
    "plateau_trial",
    "scan_trial_energies",
    "certify_negative_infimum",
    "fit_loglog_slope",
    "subadditivity_scan",
    "compact_bump",
    "brezis_lieb_probe",
    "coercivity_probe",
    "first_cell_ratio",
]


class NoWitnessError(RuntimeError):
    """Raised when no scanned trial state reaches negative energy."""


@dataclass(frozen=True)
class TrialSpec:
    """Plateau trial state parameters together with their sampling grid.

    Attributes:
        s0: Plateau height, positive.
        R_n: Inner plateau radius, at least 1 so the inner ramp fits.
        grid: Grid specification; must contain the support annulus
            r <= 2 R_n + 1 and, when an axial direction exists, the
            cutoff reach |z| <= 2, and must resolve the unit-width ramps
            with cell size at most 0.25.
    """

    s0: float
    R_n: float
    grid: GridSpec

    def __post_init__(self) -> None:
        problems = []
        if not self.s0 > 0.0:
            problems.append(f"s0 must be positive, got {self.s0}")
        if self.R_n < 1.0:
            problems.append(
                f"R_n must be >= 1 so the inner ramp fits, got {self.R_n}"
            )
        if 2.0 * self.R_n + 1.0 >= self.grid.r_max:
            problems.append(
                f"support needs r_max > {2.0 * self.R_n + 1.0:g}, "
                f"grid ends at {self.grid.r_max:g}"
            )
        if self.grid.r_max / self.grid.n_r > 0.25:
            problems.append(
                "radial cells must be at most 0.25 wide to resolve the ramps"
            )
        if self.grid.k < self.grid.N and self.grid.z_max < 2.0:
            problems.append(
                f"axial cutoff reaches |z| = 2, grid ends at {self.grid.z_max:g}"
            )
        if problems:
            raise ValueError("; ".join(problems))


def min0_trial(spec: TrialSpec) -> Field:
    """Sample the plateau-ramp trial state of a TrialSpec.

    The radial profile ramps linearly from 0 at R_n - 1 up to s0 at R_n,
    stays flat until 2 R_n, and ramps back down to 0 at 2 R_n + 1.  When
    the grid has an axial direction the profile is multiplied by a tent
    in z that is 1 on |z| <= 1 and falls to 0 at |z| = 2.  Ramps of unit
    width keep the gradient contribution proportional to the surface
    measure of the plateau edge, which is what makes these states
    efficient at buying negative W volume with little kinetic cost.
    """
    grid = build_grid(spec.grid)
    R = spec.R_n
    radial = np.clip(
        np.minimum(grid.r - (R - 1.0), (2.0 * R + 1.0) - grid.r), 0.0, 1.0
    )
    vals = spec.s0 * radial[:, None]
    if grid.spec.n_z > 1:
        tent = np.clip(2.0 - np.abs(grid.z), 0.0, 1.0)
        vals = vals * tent[None, :]
    else:
        vals = vals * np.ones((1, 1))
    return Field(grid, vals)


def _trial_grid_spec(N: int, k: int, R: float, resolution: int) -> GridSpec:
    r_max = 2.0 * R + 2.0
    n_r = int(math.ceil(r_max * resolution))
    if k == N:
        return GridSpec(N=N, k=k, r_max=r_max, n_r=n_r)
    z_max = 2.5
    n_z = int(math.ceil(2.0 * z_max * resolution))
    return GridSpec(N=N, k=k, r_max=r_max, n_r=n_r, z_max=z_max, n_z=n_z)


def plateau_trial(N: int, k: int, s0: float, R: float, resolution: int) -> Field:
    """Plateau trial state on a default grid sized to its support.

    Convenience wrapper around min0_trial that picks a box with one unit
    of clearance past the outer ramp and the given number of cells per
    unit length.

    Args:
        N: Ambient dimension.
        k: Radial dimension count of the reduction.
        s0: Plateau height, positive.
        R: Inner plateau radius, at least 1.
        resolution: Cells per unit length, at least 4 so each ramp is
            resolved by several cells.
    """
    if resolution < 4:
        raise ValueError(f"resolution must be >= 4, got {resolution}")
    return min0_trial(TrialSpec(s0=s0, R_n=R, grid=_trial_grid_spec(N, k, R, resolution)))


@dataclass(frozen=True)
class TrialRow:
    """Energy ledger of one plateau trial state."""

    R: float
    energy: float
    kinetic_radial: float
    kinetic_axial: float
    potential: float
    nonlinear: float
    mass: float


def scan_trial_energies(
    N: int,
    k: int,
    potential: PotentialSpec,
    nonlinearity: NonlinearitySpec,
    s0: float,
    radii: Sequence[float],
    resolution: int = 8,
) -> list[TrialRow]:
    """Evaluate the plateau trial energies over a list of inner radii."""
    rows = []
    for R in radii:
        trial = plateau_trial(N, k, s0, R, resolution)
        grid = trial.grid
        v_vals = potential_on_grid(potential, grid)
        bd = energy(trial, v_vals, nonlinearity)
        kin_r, kin_z = kinetic_energy_split(trial)
        rows.append(
            TrialRow(
                R=float(R),
                energy=bd.total,
                kinetic_radial=kin_r,
                kinetic_axial=kin_z,
                potential=bd.potential,
                nonlinear=bd.nonlinear,
                mass=math.sqrt(l2_norm_sq(trial)),
            )
        )
        logger.debug("trial R=%g energy=%.6g mass=%.6g", R, bd.total, rows[-1].mass)
    return rows


@dataclass(frozen=True)
class CertifyResult:
    """Outcome of a negative infimum certification.

    Attributes:
        R_star: Smallest scanned radius whose trial energy is negative.
        rho0: Mass of the witness state; on every sphere of at least this
            mass the infimum of J is provably below zero by monotone
            rearrangement of the scan.
        witness: The witness field itself, on its own grid.
        rows: All scanned rows, for reporting.
    """

    R_star: float
    rho0: float
    witness: Field
    rows: list[TrialRow]


def certify_negative_infimum(
    N: int,
    k: int,
    potential: PotentialSpec,
    nonlinearity: NonlinearitySpec,
    s0: float,
    radii: Sequence[float],
    resolution: int = 8,
) -> CertifyResult:
    """Find the smallest scanned radius with a negative energy trial state.

    Raises:
        NoWitnessError: if every scanned radius keeps J >= 0, with the
            closest call in the message.
    """
    radii = sorted(float(R) for R in radii)
    rows = scan_trial_energies(N, k, potential, nonlinearity, s0, radii, resolution)
    for row in rows:
        if row.energy < 0.0:
            witness = plateau_trial(N, k, s0, row.R, resolution)
            return CertifyResult(
                R_star=row.R, rho0=row.mass, witness=witness, rows=rows
            )
    best = min(rows, key=lambda r: r.energy)
    raise NoWitnessError(
        f"no trial went negative over radii {list(radii)} at s0={s0}; "
        f"closest was J={best.energy:.6g} at R={best.R:g}"
    )


def fit_loglog_slope(
    x: Sequence[float], y: Sequence[float]
) -> tuple[float, float]:
    """Least squares slope and intercept of log y against log x.

    Raises:
        ValueError: unless all values are positive and at least two
            points are given.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or x.size != y.size:
        raise ValueError("need matching arrays with at least 2 points")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log fit requires strictly positive data")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class SubadditivityRow:
    """One mass split mu of a subadditivity scan."""

    mu: float
    energy_mu: float
    energy_comp: float
    energy_rho: float
    margin: float
    converged: bool


@dataclass(frozen=True)
class SubadditivityReport:
    """Strict subadditivity evidence I(mu) + I(sqrt(rho^2-mu^2)) > I(rho).

    Attributes:
        rows: One row per scanned mu.
        energy_rho: Ground energy at the full mass.
        margin_floor: Strictness threshold the margins are held against.
        all_strict: True when at least one row converged and every
            converged row's margin exceeds the floor.  Rows with any
            non-converged solve carry converged=False and are excluded
            from the verdict rather than counted against it, since their
            margins are not certificates of anything.
        solves: The underlying SolveResults keyed by a mass label, kept
            for downstream inspection of traces and fields.
    """

    rows: list[SubadditivityRow]
    energy_rho: float
    margin_floor: float
    all_strict: bool
    solves: dict[str, SolveResult]


def subadditivity_scan(
    grid: Grid,
    potential: Union[PotentialSpec, NDArray[np.float64]],
    nonlinearity: NonlinearitySpec,
    rho: float,
    mus: Sequence[float],
    config: SolveConfig,
    margin_floor: Optional[float] = None,
    u0: Optional[Field] = None,
) -> SubadditivityReport:
    """Measure I(mu) + I(sqrt(rho^2 - mu^2)) - I(rho) over a list of mu.

    The full mass problem is solved first, optionally warm started from
    u0, and each partial mass problem is warm started from the full mass
    minimizer rescaled.  The default margin floor is 1e-4 * |I(rho)|,
    scaling the strictness requirement with the size of the energies
    involved.

    Args:
        grid: Shared discretization for every solve.
        potential: Potential spec or pre-sampled array.
        nonlinearity: The W term.
        rho: Full mass sphere radius.
        mus: Partial masses, each strictly inside (0, rho).
        config: Solver parameters; rho inside it is overridden per solve.
        margin_floor: Strictness threshold, defaulting as above.
        u0: Optional warm start for the full mass solve.
    """
    mus = [float(m) for m in mus]
    for mu in mus:
        if not 0.0 < mu < rho:
            raise ValueError(f"each mu must lie strictly inside (0, rho), got {mu}")
    solves: dict[str, SolveResult] = {}
    full = solve(grid, potential, nonlinearity, replace(config, rho=rho), u0=u0)
    solves["rho"] = full
    if margin_floor is None:
        margin_floor = 1e-4 * abs(full.breakdown.total)
    rows = []
    for mu in mus:
        comp = math.sqrt(rho**2 - mu**2)
        res_mu = solve(
            grid, potential, nonlinearity, replace(config, rho=mu), u0=full.field
        )
        res_comp = solve(
            grid, potential, nonlinearity, replace(config, rho=comp), u0=full.field
        )
        solves[f"mu={mu:g}"] = res_mu
        solves[f"comp={comp:g}"] = res_comp
        margin = res_mu.breakdown.total + res_comp.breakdown.total - full.breakdown.total
        ok = full.converged and res_mu.converged and res_comp.converged
        rows.append(
            SubadditivityRow(
                mu=mu,
                energy_mu=res_mu.breakdown.total,
                energy_comp=res_comp.breakdown.total,
                energy_rho=full.breakdown.total,
                margin=margin,
                converged=ok,
            )
        )
        logger.info(
            "subadditivity mu=%.4g margin=%.6g converged=%s", mu, margin, ok
        )
    strict_rows = [r for r in rows if r.converged]
    all_strict = bool(strict_rows) and all(
        r.margin > margin_floor for r in strict_rows
    )
    return SubadditivityReport(
        rows=rows,
        energy_rho=full.breakdown.total,
        margin_floor=margin_floor,
        all_strict=all_strict,
        solves=solves,
    )


def compact_bump(
    grid: Grid,
    r_center: float,
    z_center: float,
    r_width: float,
    z_width: float,
    amplitude: float = 1.0,
) -> Field:
    """Smooth bump with exactly compact support.

    Built from the mollifier profile exp(1 - 1/(1 - q^2)) on q < 1 with
    q^2 the scaled elliptic distance to the center, so values outside the
    support ellipse are exact zeros.  That exactness is what lets the
    splitting probe distinguish genuinely disjoint supports from merely
    small overlap.
    """
    if r_width <= 0.0 or z_width <= 0.0:
        raise ValueError("bump widths must be positive")
    rr = grid.r[:, None]
    zz = grid.z[None, :]
    q2 = ((rr - r_center) / r_width) ** 2 + ((zz - z_center) / z_width) ** 2
    vals = np.zeros(grid.shape)
    inside = q2 < 1.0
    vals[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - q2[inside]))
    return Field(grid, vals)


@dataclass(frozen=True)
class BrezisLiebRow:
    """Nonlinear splitting defect of two bumps at one separation."""

    separation: float
    shift_cells: int
    overlapping: bool
    defect: float


def brezis_lieb_probe(
    bump: Field, separations: Sequence[float], nonlinearity: NonlinearitySpec
) -> list[BrezisLiebRow]:
    """Measure int R(a+b) - int R(a) - int R(b) for axially shifted copies.

    The second bump b is the first translated by the nearest whole number
    of cells to each requested separation.  With compactly supported
    bumps the defect vanishes identically once the supports separate,
    while at zero separation it measures the genuine nonlinear
    interaction R(2s) - 2 R(s).
    """
    g = bump.grid
    if g.spec.n_z == 1:
        raise ValueError("the splitting probe needs an axial direction")
    rows = []
    for sep in separations:
        cells = int(round(float(sep) / g.dz))
        shifted = translate_z(bump, cells)
        combined = bump.with_values(bump.values + shifted.values)
        r_ab = float(np.sum(g.weights * eval_R(nonlinearity, combined.values)))
        r_a = float(np.sum(g.weights * eval_R(nonlinearity, bump.values)))
        r_b = float(np.sum(g.weights * eval_R(nonlinearity, shifted.values)))
        overlap = bool(
            np.any((np.abs(bump.values) > 0.0) & (np.abs(shifted.values) > 0.0))
        )
        rows.append(
            BrezisLiebRow(
                separation=float(sep),
                shift_cells=cells,
                overlapping=overlap,
                defect=r_ab - r_a - r_b,
            )
        )
    return rows


@dataclass(frozen=True)
class CoercivityRow:
    """One probe field against the coercivity chain."""

    energy: float
    kinetic: float
    c_norm_sq: float
    gn_integral: float
    ratio: float
    bound: float
    slack: float


@dataclass(frozen=True)
class CoercivityReport:
    """Per-field check of the lower bound chain

        J(u) >= 1/2 c_norm_sq(u) - b2 C (2 kinetic)^a + (Omega/2 - b1) rho^2

    with a = gamma N / 4 - N / 2 and C the largest observed ratio
    int |u|^gamma / |grad u|^(gamma N/2 - N) over the probe list, an
    empirical stand-in for the embedding constant.  Every probe field
    satisfies its own bound by construction of C; the content of the
    report is the size of the slacks and the behavior of the raw
    energies, which stay bounded below exactly when the growth exponent
    is mass subcritical.
    """

    rows: list[CoercivityRow]
    c_emp: float
    exponent: float
    min_slack: float

    @property
    def all_ok(self) -> bool:
        return self.min_slack >= 0.0


def coercivity_probe(
    potential: Union[PotentialSpec, NDArray[np.float64]],
    nonlinearity: NonlinearitySpec,
    fields: Sequence[Field],
) -> CoercivityReport:
    """Hold each probe field against the empirical coercivity bound.

    All fields must share one grid and one mass.  The potential must be
    pointwise nonnegative for the chain of inequalities to be valid;
    this is checked on the sampled values.  The growth exponent is
    taken from the nonlinearity's declared lower bound witness and is
    not required to be subcritical: running a supercritical family
    through the probe is the intended negative control, visible as
    energies decreasing without bound while the per-field slacks stay
    nonnegative by calibration.

    Raises:
        ValueError: on an empty field list, mixed grids or masses, or a
            negative potential sample.
    """
    if not fields:
        raise ValueError("need at least one probe field")
    grid = fields[0].grid
    v_vals = (
        potential_on_grid(potential, grid)
        if isinstance(potential, PotentialSpec)
        else np.asarray(potential, dtype=np.float64)
    )
    if np.min(v_vals) < 0.0:
        raise ValueError("the coercivity chain requires a nonnegative potential")
    b1, b2, gamma = nonlinearity.lower_bound_witness()
    N = grid.spec.N
    a = gamma * N / 4.0 - N / 2.0
    mass = l2_norm_sq(fields[0])
    breakdowns = []
    grads = []
    gns = []
    for f in fields:
        if f.grid is not grid and f.grid.shape != grid.shape:
            raise ValueError("probe fields must share one grid")
        if abs(l2_norm_sq(f) - mass) > 1e-8 * max(mass, 1.0):
            raise ValueError("probe fields must share one mass")
        bd = energy(f, v_vals, nonlinearity)
        breakdowns.append(bd)
        grads.append(2.0 * bd.kinetic)
        gns.append(float(np.sum(grid.weights * np.abs(f.values) ** gamma)))
    ratios = [
        gn / g2**a if g2 > 0.0 else math.inf for gn, g2 in zip(gns, grads)
    ]
    c_emp = float(max(ratios))
    const = (0.5 * nonlinearity.Omega - b1) * mass
    rows = []
    for bd, g2, gn, ratio in zip(breakdowns, grads, gns, ratios):
        bound = 0.5 * bd.c_norm_sq - b2 * c_emp * g2**a + const
        rows.append(
            CoercivityRow(
                energy=bd.total,
                kinetic=bd.kinetic,
                c_norm_sq=bd.c_norm_sq,
                gn_integral=gn,
                ratio=ratio,
                bound=bound,
                slack=bd.total - bound,
            )
        )
    return CoercivityReport(
        rows=rows,
        c_emp=c_emp,
        exponent=a,
        min_slack=min(r.slack for r in rows),
    )


def first_cell_ratio(u: Field) -> float:
    """Amplitude in the first radial cell relative to the global peak.

    Small values certify that a state carries no mass on the symmetry
    axis, the discrete signature of a vortex profile pinned to zero by a
    1/r^2 potential.
    """
    peak = float(np.max(np.abs(u.values)))
    if peak == 0.0:
        return 0.0
    return float(np.max(np.abs(u.values[0, :]))) / peak
