"""Command line front end.

Subcommands:
    solve      minimize J on the mass sphere and export the minimizer
    certify    scan plateau trials for a negative energy witness
    scan-sub   measure strict subadditivity margins over mass splits
    probe-bl   measure the nonlinear splitting defect of separating bumps
    check-hyp  verify the structural hypotheses on V and W
    hydrogen   solve the hydrogen-type functional

Every subcommand reads one INI config file named by --config.  Sections
irrelevant to the chosen subcommand are ignored, so one file can drive
several commands, but unknown keys inside a consulted section are
rejected.  --out picks the report directory and --seed overrides the
solver seed without touching the config.  Exit codes:
0 on success, 1 when the computation ran but failed its goal (no
convergence, no witness, a violated hypothesis), 2 for an invalid
config, 3 for an unparsable one.

Reports are deterministic: JSON files are written by a fixed-order
serializer with floats at 17 significant digits and contain no
timestamps, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .analysis import (
    BrezisLiebRow,
    SubadditivityReport,
    TrialRow,
    brezis_lieb_probe,
    compact_bump,
    scan_trial_energies,
    subadditivity_scan,
)
from .energy import hydrogen_effective_potential, hydrogen_specs
from .grid import Field, GridSpec, build_grid
from .model import (
    HypothesisReport,
    NonlinearitySpec,
    PotentialSpec,
    check_V_hypotheses,
    check_W_hypotheses,
)
from .solver import SolveConfig, SolveResult, solve

logger = logging.getLogger(__name__)

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "run",
    "main",
]

_REQUIRED = object()

# Absolute defect below which the splitting probe counts disjoint bumps
# as exactly local; summation order is the only noise source there.
_PROBE_TOL = 1e-12


class ConfigParseError(Exception):
    """The config file is not valid INI."""


class ConfigValidationError(Exception):
    """The config parsed but carries invalid or missing values."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


class _Reader:
    """Typed access to a ConfigParser that collects all problems."""

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser
        self.errors: list[str] = []

    def require_section(self, section: str) -> bool:
        if not self.parser.has_section(section):
            self.errors.append(f"{section}: required section is missing")
            return False
        return True

    def check_known(self, section: str, known: Sequence[str]) -> None:
        if not self.parser.has_section(section):
            return
        for key in self.parser.options(section):
            if key not in known:
                self.errors.append(f"{section}.{key}: unknown key")

    def get(self, section: str, key: str, kind: str, default: Any = _REQUIRED) -> Any:
        if not self.parser.has_section(section) or not self.parser.has_option(
            section, key
        ):
            if default is _REQUIRED:
                self.errors.append(f"{section}.{key}: required key is missing")
                return None
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return _parse_value(raw, kind)
        except ValueError:
            self.errors.append(f"{section}.{key}: cannot parse {raw!r} as {kind}")
            return None

    def build(
        self, section: str, factory, /, allow_none: Sequence[str] = (), **kwargs
    ) -> Any:
        """Call a validating constructor, filing its complaint under section.

        A None value normally means the key was missing or unparsable and
        the error is already filed, so construction is skipped.  Keys named
        in allow_none treat None as a genuine value instead.
        """
        if any(v is None for k, v in kwargs.items() if k not in allow_none):
            return None
        try:
            return factory(**kwargs)
        except ValueError as exc:
            self.errors.append(f"{section}: {exc}")
            return None


def _parse_value(raw: str, kind: str) -> Any:
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError(raw)
    if kind == "str":
        return raw
    if kind == "floats":
        return [float(part) for part in raw.split(",") if part.strip()]
    raise ValueError(f"unknown kind {kind}")


def _parse_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive, Omega != omega
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigParseError(str(exc)) from exc
    return parser


# ---------------------------------------------------------------------------
# Section readers


def _read_grid(reader: _Reader) -> Optional[GridSpec]:
    section = "grid"
    if not reader.require_section(section):
        return None
    reader.check_known(section, ["N", "k", "r_max", "n_r", "z_max", "n_z"])
    return reader.build(
        section,
        GridSpec,
        N=reader.get(section, "N", "int"),
        k=reader.get(section, "k", "int"),
        r_max=reader.get(section, "r_max", "float"),
        n_r=reader.get(section, "n_r", "int"),
        z_max=reader.get(section, "z_max", "float", 0.0),
        n_z=reader.get(section, "n_z", "int", 1),
    )


def _read_potential(reader: _Reader) -> Optional[PotentialSpec]:
    section = "potential"
    known = ["vortex_ell", "power_alpha", "power_coeff", "coulomb", "shift", "validate"]
    reader.check_known(section, known)
    return reader.build(
        section,
        PotentialSpec,
        vortex_ell=reader.get(section, "vortex_ell", "float", 0.0),
        power_alpha=reader.get(section, "power_alpha", "float", 0.0),
        power_coeff=reader.get(section, "power_coeff", "float", 0.0),
        coulomb=reader.get(section, "coulomb", "bool", False),
        shift=reader.get(section, "shift", "float", 0.0),
        validate=reader.get(section, "validate", "bool", True),
    )


def _read_nonlinearity(reader: _Reader) -> Optional[NonlinearitySpec]:
    section = "nonlinearity"
    if not reader.require_section(section):
        return None
    known = ["Omega", "kind", "p", "b1", "b2", "gamma", "c1", "c2", "q1", "q2"]
    reader.check_known(section, known)
    return reader.build(
        section,
        NonlinearitySpec,
        allow_none=("b1", "b2", "gamma", "c1", "c2", "q1", "q2"),
        Omega=reader.get(section, "Omega", "float"),
        kind=reader.get(section, "kind", "str", "power_attractive"),
        p=reader.get(section, "p", "float", 3.0),
        b1=reader.get(section, "b1", "float", None),
        b2=reader.get(section, "b2", "float", None),
        gamma=reader.get(section, "gamma", "float", None),
        c1=reader.get(section, "c1", "float", None),
        c2=reader.get(section, "c2", "float", None),
        q1=reader.get(section, "q1", "float", None),
        q2=reader.get(section, "q2", "float", None),
    )


def _read_solver(reader: _Reader) -> Optional[SolveConfig]:
    section = "solve"
    if not reader.require_section(section):
        return None
    known = [
        "rho",
        "dt_init",
        "dt_min",
        "armijo_c",
        "tol_residual",
        "max_iters",
        "recenter_every",
        "seed",
    ]
    reader.check_known(section, known)
    return reader.build(
        section,
        SolveConfig,
        rho=reader.get(section, "rho", "float"),
        dt_init=reader.get(section, "dt_init", "float", 0.1),
        dt_min=reader.get(section, "dt_min", "float", 1e-12),
        armijo_c=reader.get(section, "armijo_c", "float", 1e-4),
        tol_residual=reader.get(section, "tol_residual", "float", 1e-6),
        max_iters=reader.get(section, "max_iters", "int", 50_000),
        recenter_every=reader.get(section, "recenter_every", "int", 0),
        seed=reader.get(section, "seed", "int", 0),
    )


def _check_window(reader: _Reader, n_dim: Optional[int], nl) -> None:
    """File the dimension window of the nonlinearity as a config error.

    Only commands that minimize call this; report-style commands surface
    the same violation as a FAIL line instead of refusing to run.
    """
    if nl is None or n_dim is None:
        return
    try:
        nl.validate_for_dimension(n_dim)
    except ValueError as exc:
        reader.errors.append(f"nonlinearity: {exc}")


def _finish_validation(reader: _Reader) -> None:
    if reader.errors:
        raise ConfigValidationError(reader.errors)


# ---------------------------------------------------------------------------
# Deterministic serialization


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    return format(float(x), ".17g")


def _json_value(value: Any, indent: int) -> str:
    pad = " " * indent
    child = " " * (indent + 2)
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [
            f'{child}"{key}": {_json_value(val, indent + 2)}'
            for key, val in value.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        parts = [f"{child}{_json_value(item, indent + 2)}" for item in value]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(_json_value(payload, 0) + "\n")


def _write_field_csv(path: Path, field: Field) -> None:
    g = field.grid
    v = field.values
    lines = []
    if g.spec.n_z == 1:
        lines.append("r,u")
        for i in range(g.spec.n_r):
            lines.append(f"{_fmt_float(g.r[i])},{_fmt_float(v[i, 0])}")
    else:
        lines.append("r,z,u")
        for j in range(g.spec.n_z):
            zs = _fmt_float(g.z[j])
            for i in range(g.spec.n_r):
                lines.append(f"{_fmt_float(g.r[i])},{zs},{_fmt_float(v[i, j])}")
    path.write_text("\n".join(lines) + "\n")


def _write_trace_csv(path: Path, trace: np.ndarray) -> None:
    lines = ["iter,J,residual,dt"]
    for row in trace:
        lines.append(
            f"{int(row[0])},{_fmt_float(row[1])},{_fmt_float(row[2])},{_fmt_float(row[3])}"
        )
    path.write_text("\n".join(lines) + "\n")


def _result_payload(result: SolveResult, rho: float) -> dict:
    bd = result.breakdown
    return {
        "rho": rho,
        "lambda": result.lam,
        "residual": result.residual,
        "energy": {
            "kinetic": bd.kinetic,
            "potential": bd.potential,
            "nonlinear": bd.nonlinear,
            "total": bd.total,
            "c_norm_sq": bd.c_norm_sq,
        },
        "iters": result.iters,
        "converged": result.converged,
        "status": result.status,
        "max_norm_drift": result.max_norm_drift,
        "mass": float(
            np.sqrt(np.sum(result.field.grid.weights * result.field.values**2))
        ),
    }


def _grid_payload(spec: GridSpec) -> dict:
    return {
        "N": spec.N,
        "k": spec.k,
        "r_max": spec.r_max,
        "n_r": spec.n_r,
        "z_max": spec.z_max,
        "n_z": spec.n_z,
    }


def _export_solution(
    outdir: Path, result: SolveResult, payload: dict, plots: bool
) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "result.json", payload)
    _write_field_csv(outdir / "field.csv", result.field)
    _write_trace_csv(outdir / "trace.csv", result.trace)
    if plots:
        from . import plots as plotmod

        plotmod.save_field_figure(result.field, outdir / "field.png", title="minimizer")
        plotmod.save_trace_figure(result.trace, outdir / "trace.png")


# ---------------------------------------------------------------------------
# Subcommands


def _task_solve(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    grid_spec = _read_grid(reader)
    pot = _read_potential(reader)
    nl = _read_nonlinearity(reader)
    cfg = _read_solver(reader)
    _check_window(reader, grid_spec.N if grid_spec is not None else None, nl)
    _finish_validation(reader)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    grid = build_grid(grid_spec)
    result = solve(grid, pot, nl, cfg)
    payload = {
        "task": "solve",
        "grid": _grid_payload(grid_spec),
        **_result_payload(result, cfg.rho),
    }
    _export_solution(outdir, result, payload, plots)
    print(
        f"solve: status={result.status} iters={result.iters} "
        f"J={result.breakdown.total:.10g} lambda={result.lam:.10g} "
        f"residual={result.residual:.3e}"
    )
    return result.converged


def _task_hydrogen(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    grid_spec = _read_grid(reader)
    cfg = _read_solver(reader)
    section = "hydrogen"
    reader.require_section(section)
    reader.check_known(section, ["ell", "Omega", "p"])
    ell = reader.get(section, "ell", "float")
    omega = reader.get(section, "Omega", "float")
    p = reader.get(section, "p", "float")
    specs = None
    if grid_spec is not None and None not in (ell, omega, p):
        if grid_spec.k != 2:
            reader.errors.append("grid: the hydrogen functional requires k = 2")
        else:
            specs = reader.build(section, hydrogen_specs, ell=ell, Omega=omega, p=p, N=grid_spec.N)
    _finish_validation(reader)
    if specs is None:
        raise ConfigValidationError(reader.errors or ["hydrogen: invalid parameters"])
    pot, nl = specs
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    grid = build_grid(grid_spec)
    result = solve(grid, pot, nl, cfg)
    v_eff = hydrogen_effective_potential(grid, ell, omega)
    payload = {
        "task": "hydrogen",
        "grid": _grid_payload(grid_spec),
        "hydrogen": {"ell": ell, "Omega": omega, "p": p},
        "v_eff_min": float(np.min(v_eff)),
        **_result_payload(result, cfg.rho),
    }
    _export_solution(outdir, result, payload, plots)
    print(
        f"hydrogen: status={result.status} iters={result.iters} "
        f"G={result.breakdown.total:.10g} v_eff_min={float(np.min(v_eff)):.6g}"
    )
    return result.converged


def _task_certify(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    section = "certify"
    reader.require_section(section)
    reader.check_known(section, ["N", "k", "s0", "radii", "resolution"])
    n_dim = reader.get(section, "N", "int")
    k = reader.get(section, "k", "int")
    s0 = reader.get(section, "s0", "float")
    radii = reader.get(section, "radii", "floats")
    if radii == []:
        reader.errors.append("certify.radii: need at least one radius")
    resolution = reader.get(section, "resolution", "int", 8)
    pot = _read_potential(reader)
    nl = _read_nonlinearity(reader)
    _check_window(reader, n_dim, nl)
    _finish_validation(reader)

    rows = scan_trial_energies(n_dim, k, pot, nl, s0, sorted(radii), resolution)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_trials_csv(outdir / "trials.csv", rows)
    if plots:
        from . import plots as plotmod

        plotmod.save_scaling_figure(rows, outdir / "scaling.png")
    negative = [row for row in rows if row.energy < 0.0]
    payload = {
        "task": "certify",
        "s0": s0,
        "resolution": resolution,
        "rows": [_trial_payload(row) for row in rows],
        "witness_found": bool(negative),
    }
    if negative:
        payload["R_star"] = negative[0].R
        payload["rho0"] = negative[0].mass
    _write_json(outdir / "certify.json", payload)
    if negative:
        print(
            f"certify: witness at R={negative[0].R:g} with J={negative[0].energy:.6g}, "
            f"mass rho0={negative[0].mass:.6g}"
        )
        return True
    best = min(rows, key=lambda r: r.energy)
    print(f"certify: no witness, closest J={best.energy:.6g} at R={best.R:g}")
    return False


def _trial_payload(row: TrialRow) -> dict:
    return {
        "R": row.R,
        "energy": row.energy,
        "kinetic_radial": row.kinetic_radial,
        "kinetic_axial": row.kinetic_axial,
        "potential": row.potential,
        "nonlinear": row.nonlinear,
        "mass": row.mass,
    }


def _write_trials_csv(path: Path, rows: Sequence[TrialRow]) -> None:
    lines = ["R,energy,kinetic_radial,kinetic_axial,potential,nonlinear,mass"]
    for row in rows:
        lines.append(
            ",".join(
                _fmt_float(x)
                for x in (
                    row.R,
                    row.energy,
                    row.kinetic_radial,
                    row.kinetic_axial,
                    row.potential,
                    row.nonlinear,
                    row.mass,
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _task_scan_sub(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    grid_spec = _read_grid(reader)
    pot = _read_potential(reader)
    nl = _read_nonlinearity(reader)
    cfg = _read_solver(reader)
    section = "scan"
    reader.require_section(section)
    reader.check_known(section, ["mus", "margin_floor"])
    mus = reader.get(section, "mus", "floats")
    margin_floor = reader.get(section, "margin_floor", "float", None)
    if mus == []:
        reader.errors.append("scan.mus: need at least one split mass")
    if mus and cfg is not None:
        bad = [m for m in mus if not 0.0 < m < cfg.rho]
        if bad:
            reader.errors.append(
                f"scan.mus: values must lie strictly inside (0, rho), got {bad}"
            )
    _check_window(reader, grid_spec.N if grid_spec is not None else None, nl)
    _finish_validation(reader)

    if seed is not None:
        cfg = replace(cfg, seed=seed)
    grid = build_grid(grid_spec)
    report = subadditivity_scan(
        grid, pot, nl, cfg.rho, mus, cfg, margin_floor=margin_floor
    )
    outdir.mkdir(parents=True, exist_ok=True)
    _write_subadditivity_csv(outdir / "subadditivity.csv", report)
    payload = {
        "task": "scan-sub",
        "rho": cfg.rho,
        "energy_rho": report.energy_rho,
        "margin_floor": report.margin_floor,
        "all_strict": report.all_strict,
        "rows": [
            {
                "mu": row.mu,
                "I_mu": row.energy_mu,
                "I_sqrt": row.energy_comp,
                "I_rho": row.energy_rho,
                "margin": row.margin,
                "converged": row.converged,
            }
            for row in report.rows
        ],
    }
    _write_json(outdir / "scan.json", payload)
    if plots:
        from . import plots as plotmod

        plotmod.save_subadditivity_figure(report, outdir / "margins.png")
        plotmod.save_field_figure(
            report.solves["rho"].field, outdir / "field.png", title="full mass minimizer"
        )
    for row in report.rows:
        print(
            f"scan-sub: mu={row.mu:.6g} margin={row.margin:.6g} "
            f"converged={str(row.converged).lower()}"
        )
    print(f"scan-sub: all_strict={str(report.all_strict).lower()}")
    return report.all_strict


def _write_subadditivity_csv(path: Path, report: SubadditivityReport) -> None:
    lines = ["mu,I_mu,I_sqrt,I_rho,margin,converged"]
    for row in report.rows:
        lines.append(
            f"{_fmt_float(row.mu)},{_fmt_float(row.energy_mu)},"
            f"{_fmt_float(row.energy_comp)},{_fmt_float(row.energy_rho)},"
            f"{_fmt_float(row.margin)},{str(row.converged).lower()}"
        )
    path.write_text("\n".join(lines) + "\n")


def _task_probe_bl(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    grid_spec = _read_grid(reader)
    nl = _read_nonlinearity(reader)
    section = "probe"
    reader.require_section(section)
    known = ["r_center", "z_center", "r_width", "z_width", "amplitude", "separations"]
    reader.check_known(section, known)
    r_center = reader.get(section, "r_center", "float")
    z_center = reader.get(section, "z_center", "float")
    r_width = reader.get(section, "r_width", "float")
    z_width = reader.get(section, "z_width", "float")
    amplitude = reader.get(section, "amplitude", "float", 1.0)
    separations = reader.get(section, "separations", "floats")
    if separations == []:
        reader.errors.append("probe.separations: need at least one separation")
    if grid_spec is not None and grid_spec.n_z == 1:
        reader.errors.append("grid: the splitting probe needs an axial direction")
    _finish_validation(reader)

    grid = build_grid(grid_spec)
    bump = compact_bump(grid, r_center, z_center, r_width, z_width, amplitude)
    rows = brezis_lieb_probe(bump, separations, nl)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_probe_csv(outdir / "brezis_lieb.csv", rows)
    payload = {
        "task": "probe-bl",
        "rows": [
            {
                "separation": row.separation,
                "shift_cells": row.shift_cells,
                "overlapping": row.overlapping,
                "defect": row.defect,
            }
            for row in rows
        ],
    }
    _write_json(outdir / "probe.json", payload)
    if plots:
        from . import plots as plotmod

        plotmod.save_defect_figure(rows, outdir / "defect.png")
    ok = True
    for row in rows:
        print(
            f"probe-bl: sep={row.separation:g} overlap={str(row.overlapping).lower()} "
            f"defect={row.defect:.6e}"
        )
        if not row.overlapping and abs(row.defect) > _PROBE_TOL:
            ok = False
    return ok


def _write_probe_csv(path: Path, rows: Sequence[BrezisLiebRow]) -> None:
    lines = ["separation,shift_cells,overlapping,defect"]
    for row in rows:
        lines.append(
            f"{_fmt_float(row.separation)},{row.shift_cells},"
            f"{str(row.overlapping).lower()},{_fmt_float(row.defect)}"
        )
    path.write_text("\n".join(lines) + "\n")


def _task_check_hyp(
    parser: configparser.ConfigParser,
    outdir: Path,
    plots: bool,
    seed: Optional[int] = None,
) -> bool:
    reader = _Reader(parser)
    section = "check"
    known = ["N", "r_min", "r_max", "n_samples", "s_min", "s_max", "n_s"]
    reader.check_known(section, known)
    n_dim = reader.get(section, "N", "int", 3)
    r_min = reader.get(section, "r_min", "float", 0.05)
    r_max = reader.get(section, "r_max", "float", 200.0)
    n_samples = reader.get(section, "n_samples", "int", 400)
    s_min = reader.get(section, "s_min", "float", 1e-6)
    s_max = reader.get(section, "s_max", "float", 1e3)
    n_s = reader.get(section, "n_s", "int", 400)

    hydrogen = None
    if parser.has_section("hydrogen"):
        # A hydrogen block replaces the radial V checks: its potential
        # depends on (r, z), so positivity is sampled densely instead.
        reader.check_known("hydrogen", ["ell", "Omega", "p"])
        ell = reader.get("hydrogen", "ell", "float")
        omega = reader.get("hydrogen", "Omega", "float")
        p = reader.get("hydrogen", "p", "float")
        if None not in (ell, omega, p, n_dim):
            hydrogen = reader.build(
                "hydrogen", hydrogen_specs, ell=ell, Omega=omega, p=p, N=n_dim
            )
        _finish_validation(reader)
        if hydrogen is None:
            raise ConfigValidationError(["hydrogen: invalid parameters"])
        nl = hydrogen[1]
    else:
        pot = _read_potential(reader)
        nl = _read_nonlinearity(reader)
        if pot is not None and not pot.is_radial:
            reader.errors.append(
                "potential: hypothesis checks cover radial potentials only"
            )
        _finish_validation(reader)

    amplitudes = np.geomspace(s_min, s_max, n_s)
    w_report = check_W_hypotheses(nl, n_dim, amplitudes)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {"task": "check-hyp"}
    reports = [("W", w_report)]
    if hydrogen is not None:
        sample = build_grid(
            GridSpec(N=n_dim, k=2, r_max=r_max, n_r=n_samples,
                     z_max=r_max, n_z=n_samples)
        )
        v_eff = hydrogen_effective_potential(sample, ell, omega)
        v_min = float(np.min(v_eff))
        h_report = HypothesisReport(
            checks={"effective_potential_nonnegative": bool(v_min >= 0.0)},
            data={"v_eff_min": v_min},
        )
        payload["hydrogen"] = _hypothesis_payload(h_report)
        reports.insert(0, ("hydrogen", h_report))
    else:
        radii = np.geomspace(r_min, r_max, n_samples)
        v_report = check_V_hypotheses(pot, radii)
        payload["potential"] = _hypothesis_payload(v_report)
        reports.insert(0, ("V", v_report))
    payload["nonlinearity"] = _hypothesis_payload(w_report)
    all_ok = all(report.all_ok for _, report in reports)
    payload["all_ok"] = all_ok
    _write_json(outdir / "hypotheses.json", payload)
    for name, report in reports:
        for check, ok in report.checks.items():
            print(f"check-hyp: {name}.{check}: {'PASS' if ok else 'FAIL'}")
    return all_ok


def _hypothesis_payload(report: HypothesisReport) -> dict:
    return {
        "checks": dict(report.checks),
        "data": {key: float(val) for key, val in report.data.items()},
        "all_ok": report.all_ok,
    }


_TASKS = {
    "solve": _task_solve,
    "certify": _task_certify,
    "scan-sub": _task_scan_sub,
    "probe-bl": _task_probe_bl,
    "check-hyp": _task_check_hyp,
    "hydrogen": _task_hydrogen,
}


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cylwave",
        description="Constrained minimization of cylindrical nonlinear "
        "Schrodinger energies with singular potentials.",
    )
    sub = ap.add_subparsers(dest="task", required=True)
    for name in _TASKS:
        task_ap = sub.add_parser(name)
        task_ap.add_argument(
            "--config", required=True, help="path to an INI config file"
        )
        task_ap.add_argument(
            "--out",
            default="out",
            help="directory for reports, created if needed (default: out)",
        )
        task_ap.add_argument(
            "--seed",
            type=int,
            default=None,
            help="override the solver seed from the config",
        )
        task_ap.add_argument(
            "--no-plots",
            action="store_true",
            help="skip figure rendering, keep only delimited output",
        )
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the process exit code."""
    args = _build_argparser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        parser = _parse_ini(text)
        ok = _TASKS[args.task](parser, Path(args.out), not args.no_plots, args.seed)
    except ConfigParseError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return 3
    except ConfigValidationError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def main() -> None:
    logging.basicConfig(level=logging.WARNING)
    sys.exit(run())


if __name__ == "__main__":
    main()
