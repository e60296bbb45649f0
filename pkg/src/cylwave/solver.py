"""Projected gradient descent on the mass sphere.

The iteration is plain normalized descent: step against the gradient,
pull back onto the sphere of mass rho^2, and accept only steps that
decrease the energy by a fixed fraction of the squared tangential
residual.  Two details carry the numerical load:

* Step acceptance compares energies through the increment evaluation
  behind :func:`cylwave.energy.energy_increment`, with the current
  multiplier estimate as shift, so its rounding error is proportional
  to the step and insensitive to the mass wobble that renormalization
  injects.  Subtracting two full energies instead would bottom out at
  eps * |J|, which on concentrated states with large |J| is orders of
  magnitude above the residual tolerance.
* Step sizes are proposed by a Barzilai-Borwein quotient built from the
  last accepted move, clipped to two decades per iteration, with plain
  geometric growth as the fallback.  Rejected trials halve the step.

Energies reported in the trace are the accumulated increments, which
makes the recorded sequence decrease monotonically by construction; the
final breakdown is evaluated fresh from the converged field and can
differ from the last trace entry in the trailing digits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .energy import (
    EnergyBreakdown,
    _as_potential,
    _increment_core,
    energy,
    energy_increment,
    euler_lagrange_residual,
    gradient,
    lambda_estimate,
)
from .grid import (
    Field,
    Grid,
    SupportOverflowError,
    _neg_laplacian_raw,
    l2_norm_sq,
    recenter_z,
)
from .model import (
    NonlinearitySpec,
    PotentialSpec,
    eval_R_prime,
    potential_on_grid,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SolveConfig",
    "SolveResult",
    "normalize",
    "default_initial_guess",
    "step",
    "solve",
    "continuation",
]

# Barzilai-Borwein proposals may move the step by at most this factor
# per iteration, in either direction.
_BB_CLIP = 100.0
# Fallback growth factor when no curvature information is available.
_DT_GROWTH = 1.2


@dataclass(frozen=True)
class SolveConfig:
    """Knobs for one constrained descent run.

    Attributes:
        rho: Constraint radius; the iterate lives on mass rho^2.
        dt_init: Initial step size.
        dt_min: Smallest step the line search may try before giving up
            on the iteration as stalled.
        armijo_c: Sufficient-decrease fraction; a trial is accepted when
            the energy drops by at least armijo_c * dt * residual^2.
        tol_residual: Convergence threshold, relative to rho, on the
            Euler-Lagrange residual.
        max_iters: Cap on accepted steps.
        recenter_every: Recenter the field in z every this many accepted
            steps (0 disables; only meaningful when the grid has a z
            extent).
        seed: Seed for the default initial guess.
    """

    rho: float
    dt_init: float = 0.1
    dt_min: float = 1e-12
    armijo_c: float = 1e-4
    tol_residual: float = 1e-6
    max_iters: int = 50_000
    recenter_every: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        problems = []
        if not (np.isfinite(self.rho) and self.rho > 0.0):
            problems.append(f"rho must be positive and finite, got {self.rho}")
        if not (np.isfinite(self.dt_init) and self.dt_init > 0.0):
            problems.append(f"dt_init must be positive, got {self.dt_init}")
        if not (0.0 < self.dt_min <= self.dt_init):
            problems.append(
                f"dt_min must lie in (0, dt_init], got {self.dt_min} "
                f"with dt_init={self.dt_init}"
            )
        if not (0.0 < self.armijo_c < 1.0):
            problems.append(f"armijo_c must lie in (0, 1), got {self.armijo_c}")
        if not (np.isfinite(self.tol_residual) and self.tol_residual > 0.0):
            problems.append(
                f"tol_residual must be positive, got {self.tol_residual}"
            )
        if self.max_iters < 1:
            problems.append(f"max_iters must be at least 1, got {self.max_iters}")
        if self.recenter_every < 0:
            problems.append(
                f"recenter_every must be nonnegative, got {self.recenter_every}"
            )
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a descent run.

    Attributes:
        field: Final iterate, on the constraint sphere.
        breakdown: Energy breakdown of the final iterate, evaluated
            fresh.
        lam: Rayleigh estimate of the Lagrange multiplier.
        residual: Euler-Lagrange residual at the final iterate.
        iters: Number of accepted steps.
        trace: Array of shape (iters, 4) with columns
            (iter, J, residual, dt), one row per accepted step.  The J
            column accumulates the incremental energy differences of
            accepted steps, so it decreases strictly.
        converged: True when the residual tolerance was met.
        max_norm_drift: Largest relative deviation |mass - rho^2| /
            rho^2 seen over the run.
        status: "converged", "max_iters", or "stalled" (line search
            exhausted dt_min without finding descent).
    """

    field: Field
    breakdown: EnergyBreakdown
    lam: float
    residual: float
    iters: int
    trace: NDArray[np.float64]
    converged: bool
    max_norm_drift: float
    status: str


def normalize(u: Field, rho: float) -> Field:
    """Rescale u onto the sphere of mass rho^2.

    Raises:
        ValueError: if u has zero or non-finite mass.
    """
    mass = l2_norm_sq(u)
    if not (np.isfinite(mass) and mass > 0.0):
        raise ValueError(f"cannot normalize a field of mass {mass}")
    return u.with_values(u.values * (rho / np.sqrt(mass)))


def default_initial_guess(grid: Grid, seed: int = 0) -> Field:
    """Smooth positive off-axis bump with a deterministic jitter.

    The bump sits at a quarter of the radial box so vortex-type
    potentials do not see mass stuck on the axis, with mild seed-driven
    perturbations of its center and width to decorrelate repeated runs.
    """
    rng = np.random.default_rng(seed)
    r_c = grid.spec.r_max * (0.25 + 0.05 * rng.uniform(-1.0, 1.0))
    width = grid.spec.r_max / 6.0 * (1.0 + 0.2 * rng.uniform(-1.0, 1.0))
    rr = grid.r[:, None]
    vals = np.exp(-((rr - r_c) ** 2) / (2.0 * width**2))
    if grid.spec.n_z > 1:
        z_c = grid.spec.z_max * 0.1 * rng.uniform(-1.0, 1.0)
        z_w = grid.spec.z_max / 4.0
        vals = vals * np.exp(-((grid.z[None, :] - z_c) ** 2) / (2.0 * z_w**2))
    else:
        vals = np.broadcast_to(vals, grid.shape).copy()
    return Field(grid, vals)


def step(
    u: Field,
    dt: float,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
    config: SolveConfig,
) -> tuple[Field, bool]:
    """One trial of the projected descent update, without iteration.

    Builds the candidate normalize(u - dt * gradient(u)) on the sphere
    of mass config.rho**2 and reports whether it passes the sufficient
    decrease test against the squared tangential residual.  The caller
    owns step-size policy; rejected candidates are returned anyway so a
    line search can inspect them.  The solve loop fuses this logic with
    reuse of per-iterate quantities, this entry point exists for
    stepwise inspection and tests.

    Returns:
        (candidate, accepted); candidate is u itself when the raw step
        cannot even be normalized (overflow or zero mass).
    """
    v = _as_potential(u.grid, potential)
    grad = gradient(u, v, nonlinearity)
    lam = lambda_estimate(u, grad)
    res = euler_lagrange_residual(u, grad, lam)
    quad_grad = grad.values - eval_R_prime(nonlinearity, u.values)
    try:
        trial = normalize(Field(u.grid, u.values - dt * grad.values), config.rho)
    except ValueError:
        return u, False
    delta = trial.values - u.values
    d_j = energy_increment(u, delta, v, nonlinearity, quad_grad, shift=lam)
    return trial, bool(d_j <= -config.armijo_c * dt * res * res)


def solve(
    grid: Grid,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
    config: SolveConfig,
    u0: Field | None = None,
) -> SolveResult:
    """Minimize J over the sphere of mass rho^2 by projected descent.

    Args:
        grid: Discretization.
        potential: Potential spec, or V already sampled on the grid.
        nonlinearity: Nonlinearity spec; its exponent windows are
            validated against the grid's ambient dimension.
        config: Descent parameters.
        u0: Optional initial field (any nonzero mass; it is normalized).
            Defaults to a seeded smooth bump.

    Returns:
        SolveResult with the final iterate and per-step trace.
    """
    v = _as_potential(grid, potential)
    nonlinearity.validate_for_dimension(grid.spec.N)
    if u0 is None:
        u0 = default_initial_guess(grid, config.seed)
    elif u0.grid is not grid and u0.grid.shape != grid.shape:
        raise ValueError("u0 lives on an incompatible grid")

    w = grid.weights
    vpo = v + nonlinearity.Omega
    rho = config.rho
    rho_sq = rho**2
    u = normalize(u0, rho)
    j_track = energy(u, v, nonlinearity).total
    drift = abs(l2_norm_sq(u) - rho_sq) / rho_sq
    tol = config.tol_residual * rho

    def differentials(
        vals: NDArray[np.float64],
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], float, float]:
        """Gradient, its quadratic part, multiplier, and residual at vals."""
        quad_grad = _neg_laplacian_raw(grid, vals) + vpo * vals
        grad_vals = quad_grad + eval_R_prime(nonlinearity, vals)
        lam = float(np.einsum("ij,ij,ij->", w, grad_vals, vals)) / float(
            np.einsum("ij,ij,ij->", w, vals, vals)
        )
        tang = grad_vals - lam * vals
        res = float(np.sqrt(np.einsum("ij,ij,ij->", w, tang, tang)))
        return grad_vals, quad_grad, lam, res

    grad_vals, quad_grad, lam, res = differentials(u.values)

    rows: list[tuple[float, float, float, float]] = []
    dt = config.dt_init
    iters = 0
    status = "max_iters"
    prev_vals: NDArray[np.float64] | None = None
    prev_grad: NDArray[np.float64] | None = None

    while True:
        if res <= tol:
            status = "converged"
            break
        if iters >= config.max_iters:
            status = "max_iters"
            break

        # The shifted quadratic gradient and potential are constant over
        # the line search, so build them once per iterate.
        pg = quad_grad - lam * u.values
        veff = vpo - lam
        accepted = False
        d_j = 0.0
        trial_vals = u.values
        while dt >= config.dt_min:
            raw = u.values - dt * grad_vals
            with np.errstate(over="ignore", invalid="ignore"):
                raw_mass = float(np.einsum("ij,ij,ij->", w, raw, raw))
            if not (np.isfinite(raw_mass) and raw_mass > 0.0):
                dt *= 0.5
                continue
            # A finite weighted mass certifies every entry of raw is
            # finite, so the rescaled trial needs no separate check.
            trial_vals = raw * (rho / np.sqrt(raw_mass))
            delta = trial_vals - u.values
            d_j = _increment_core(grid, u.values, delta, pg, veff, nonlinearity)
            if d_j <= -config.armijo_c * dt * res * res:
                accepted = True
                break
            dt *= 0.5
        if not accepted:
            status = "stalled"
            logger.info(
                "line search stalled at iter %d, residual %.3e (tol %.3e)",
                iters,
                res,
                tol,
            )
            break

        prev_vals = u.values
        prev_grad = grad_vals
        u = Field(grid, trial_vals)
        j_track += d_j
        grad_vals, quad_grad, lam, res = differentials(u.values)
        iters += 1
        drift = max(drift, abs(l2_norm_sq(u) - rho_sq) / rho_sq)
        rows.append((float(iters), j_track, res, dt))

        if (
            config.recenter_every > 0
            and grid.spec.n_z > 1
            and iters % config.recenter_every == 0
        ):
            try:
                shifted, cells = recenter_z(u)
            except SupportOverflowError:
                shifted, cells = u, 0
            if cells != 0:
                j_shift = energy(shifted, v, nonlinearity).total
                # Adopt only on a genuine decrease of the tracked value,
                # so the trace stays monotone across recenterings.
                if j_shift <= j_track:
                    u = shifted
                    j_track = j_shift
                    grad_vals, quad_grad, lam, res = differentials(u.values)
                    prev_vals = None
                    prev_grad = None

        if prev_vals is not None and prev_grad is not None:
            s = u.values - prev_vals
            y = grad_vals - prev_grad
            sy = float(np.einsum("ij,ij,ij->", w, s, y))
            if sy > 0.0:
                ss = float(np.einsum("ij,ij,ij->", w, s, s))
                dt = float(np.clip(ss / sy, dt / _BB_CLIP, dt * _BB_CLIP))
            else:
                dt *= _DT_GROWTH
        else:
            dt *= _DT_GROWTH

    trace = np.array(rows, dtype=np.float64).reshape(len(rows), 4)
    bd = energy(u, v, nonlinearity)
    return SolveResult(
        field=u,
        breakdown=bd,
        lam=lam,
        residual=res,
        iters=iters,
        trace=trace,
        converged=status == "converged",
        max_norm_drift=drift,
        status=status,
    )


def continuation(
    grid: Grid,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
    rhos: list[float],
    config: SolveConfig,
    u0: Field | None = None,
) -> list[SolveResult]:
    """Solve a sequence of masses, warm-starting each from the last.

    Useful when the target mass concentrates the minimizer enough that
    a cold start wanders: intermediate masses walk the iterate into the
    right basin.
    """
    if not rhos:
        raise ValueError("continuation needs at least one rho")
    results = []
    warm = u0
    for rho in rhos:
        cfg = replace(config, rho=rho)
        result = solve(grid, potential, nonlinearity, cfg, u0=warm)
        results.append(result)
        warm = result.field
    return results
