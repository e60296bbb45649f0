"""Constrained minimization of cylindrically symmetric nonlinear
Schrodinger energies with singular potentials.

The package splits into a geometry layer (:mod:`cylwave.grid`), the model
terms and their hypotheses (:mod:`cylwave.model`), the functional and its
gradient (:mod:`cylwave.energy`), the constrained descent solver
(:mod:`cylwave.solver`), variational diagnostics (:mod:`cylwave.analysis`),
and a command line front end (:mod:`cylwave.cli`).
"""

from .analysis import (
    BrezisLiebRow,
    CertifyResult,
    CoercivityReport,
    NoWitnessError,
    SubadditivityReport,
    TrialRow,
    TrialSpec,
    brezis_lieb_probe,
    certify_negative_infimum,
    coercivity_probe,
    compact_bump,
    first_cell_ratio,
    fit_loglog_slope,
    min0_trial,
    plateau_trial,
    scan_trial_energies,
    subadditivity_scan,
)
from .energy import (
    EnergyBreakdown,
    dilate,
    el_residual,
    energy,
    energy_increment,
    euler_lagrange_residual,
    gradient,
    hydrogen_effective_potential,
    hydrogen_energy,
    hydrogen_specs,
    lambda_estimate,
)
from .grid import (
    Field,
    Grid,
    GridSpec,
    SupportOverflowError,
    apply_neg_laplacian,
    build_grid,
    field_from_function,
    inner,
    integrate,
    kinetic_energy,
    kinetic_energy_split,
    l2_norm_sq,
    recenter_z,
    resample,
    sphere_area,
    translate_z,
)
from .model import (
    HypothesisReport,
    NonlinearitySpec,
    PotentialSpec,
    check_V_hypotheses,
    check_W_hypotheses,
    eval_potential,
    eval_R,
    eval_R_increment,
    eval_R_prime,
    eval_W,
    eval_W_prime,
    negative_well_root,
    potential_on_grid,
)
from .solver import (
    SolveConfig,
    SolveResult,
    continuation,
    default_initial_guess,
    normalize,
    solve,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Field",
    "Grid",
    "GridSpec",
    "SupportOverflowError",
    "apply_neg_laplacian",
    "build_grid",
    "field_from_function",
    "inner",
    "integrate",
    "kinetic_energy",
    "kinetic_energy_split",
    "l2_norm_sq",
    "recenter_z",
    "resample",
    "sphere_area",
    "translate_z",
    "HypothesisReport",
    "NonlinearitySpec",
    "PotentialSpec",
    "check_V_hypotheses",
    "check_W_hypotheses",
    "eval_potential",
    "eval_R",
    "eval_R_increment",
    "eval_R_prime",
    "eval_W",
    "eval_W_prime",
    "negative_well_root",
    "potential_on_grid",
    "EnergyBreakdown",
    "dilate",
    "el_residual",
    "energy",
    "energy_increment",
    "euler_lagrange_residual",
    "gradient",
    "hydrogen_effective_potential",
    "hydrogen_energy",
    "hydrogen_specs",
    "lambda_estimate",
    "SolveConfig",
    "SolveResult",
    "continuation",
    "default_initial_guess",
    "normalize",
    "solve",
    "step",
    "BrezisLiebRow",
    "CertifyResult",
    "CoercivityReport",
    "NoWitnessError",
    "SubadditivityReport",
    "TrialRow",
    "TrialSpec",
    "brezis_lieb_probe",
    "certify_negative_infimum",
    "coercivity_probe",
    "compact_bump",
    "first_cell_ratio",
    "fit_loglog_slope",
    "min0_trial",
    "plateau_trial",
    "scan_trial_energies",
    "subadditivity_scan",
]
