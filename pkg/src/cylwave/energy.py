"""Energy functional, its gradient, and variational diagnostics.

The central object is

    J(u) = int ( 1/2 |grad u|^2 + 1/2 V u^2 + W(u) ) dmu

evaluated with the discrete kinetic form of :mod:`cylwave.grid`, so the
gradient returned here is the exact derivative of the discrete J, not a
separate discretization of the formal Euler-Lagrange operator.  That
exactness is what makes descent with an Armijo test robust: accepted
steps decrease the actual number being minimized.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RegularGridInterpolator

from .grid import (
    Field,
    Grid,
    SupportOverflowError,
    _augmented_axes,
    _kinetic_raw_split,
    apply_neg_laplacian,
    inner,
    kinetic_energy,
    l2_norm_sq,
)
from .model import (
    NonlinearitySpec,
    PotentialSpec,
    eval_R_increment,
    eval_W,
    eval_W_prime,
    potential_on_grid,
)

logger = logging.getLogger(__name__)

__all__ = [
    "EnergyBreakdown",
    "energy",
    "energy_increment",
    "gradient",
    "lambda_estimate",
    "euler_lagrange_residual",
    "el_residual",
    "dilate",
    "hydrogen_specs",
    "hydrogen_effective_potential",
    "hydrogen_energy",
]

# Relative amplitude below which a cell does not count as support when
# checking whether a dilation still fits inside the box.
_SUPPORT_TOL = 1e-12


def _as_potential(
    grid: Grid, potential: PotentialSpec | NDArray[np.float64]
) -> NDArray[np.float64]:
    """Sample a PotentialSpec, or validate an already sampled array."""
    if isinstance(potential, PotentialSpec):
        return potential_on_grid(potential, grid)
    arr = np.asarray(potential, dtype=np.float64)
    if arr.shape != grid.shape:
        raise ValueError(
            f"potential array shape {arr.shape} does not match grid {grid.shape}"
        )
    return arr


@dataclass(frozen=True)
class EnergyBreakdown:
    """J(u) split into its three integrands.

    Attributes:
        kinetic: (1/2) int |grad u|^2.
        potential: (1/2) int V u^2.
        nonlinear: int W(u), mass term included.
        total: Sum of the three.
        c_norm_sq: int (|grad u|^2 + V u^2), the squared cylindrical
            norm, equal to 2 * (kinetic + potential).
    """

    kinetic: float
    potential: float
    nonlinear: float
    total: float
    c_norm_sq: float


def energy(
    u: Field,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
) -> EnergyBreakdown:
    """Evaluate J(u).

    The potential may be given as a spec or pre-sampled on u's grid;
    inner loops should sample once and pass the array.

    Raises:
        ValueError: if any contribution is not finite, which is how
            overflow in trial states surfaces to the solver.
    """
    g = u.grid
    v = u.values
    potential = _as_potential(g, potential)
    kin = kinetic_energy(u)
    with np.errstate(over="raise", invalid="raise"):
        try:
            pot = 0.5 * float(np.sum(g.weights * potential * v**2))
            nl = float(np.sum(g.weights * eval_W(nonlinearity, v)))
        except FloatingPointError as exc:
            raise ValueError(f"energy evaluation overflowed: {exc}") from exc
    total = kin + pot + nl
    if not math.isfinite(total):
        raise ValueError(f"energy is not finite: kinetic={kin} potential={pot} W={nl}")
    return EnergyBreakdown(
        kinetic=kin,
        potential=pot,
        nonlinear=nl,
        total=total,
        c_norm_sq=2.0 * (kin + pot),
    )


def energy_increment(
    u: Field,
    delta: NDArray[np.float64],
    potential: NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
    quad_gradient: NDArray[np.float64],
    shift: float = 0.0,
) -> float:
    """Cancellation-free evaluation of J(u + delta) - J(u).

    Computing the difference of two full energies rounds each of them to
    eps times the magnitude of J, which near a minimizer can dwarf the
    true decrease of a descent step.  This expands the difference
    exactly instead: the quadratic part contributes <A u, delta> plus
    1/2 <A delta, delta> with A = -Lap + V + Omega, and the power part
    is accumulated pointwise through expm1/log1p.  Every term is then
    proportional to the step, so descent stays resolvable down to
    residual scales far below what whole-energy subtraction supports.

    With a nonzero shift the increment is taken of the shifted
    functional J(x) - shift/2 * l2_norm_sq(x) instead.  On the mass
    sphere the two increments agree exactly, but a constrained descent
    loop should pass its multiplier estimate here: renormalizing a
    trial rounds every entry, perturbing the trial's mass by order eps,
    and the plain increment feels that as multiplier times mass noise,
    drowning genuine decreases near stationarity.  The shifted form is
    first order flat in the mass direction, so that noise cancels
    analytically.

    Args:
        u: Base field.
        delta: Increment values, on u's grid.
        potential: Sampled V on u's grid.
        nonlinearity: Nonlinearity spec.
        quad_gradient: Values of (-Lap + V + Omega) u, recoverable from
            the gradient as grad - R'(u).
        shift: Multiplier of the mass functional subtracted from J.

    Returns:
        The (shifted) energy difference.  Overflowing trials yield inf
        or nan rather than raising, so a line search can treat them as
        plain rejections.
    """
    pg = quad_gradient - shift * u.values if shift != 0.0 else quad_gradient
    veff = potential + (nonlinearity.Omega - shift)
    return _increment_core(u.grid, u.values, delta, pg, veff, nonlinearity)


def _increment_core(
    grid: Grid,
    base: NDArray[np.float64],
    delta: NDArray[np.float64],
    pg: NDArray[np.float64],
    veff: NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
) -> float:
    """Hot path of energy_increment on raw arrays.

    pg is the (already shifted) quadratic gradient and veff the
    (already shifted) total quadratic potential V + Omega - shift, so a
    line search can precompute both once per iterate.
    """
    w = grid.weights
    with np.errstate(over="ignore", invalid="ignore"):
        rad, ax = _kinetic_raw_split(grid, delta)
        linear = float(np.einsum("ij,ij,ij->", w, pg, delta))
        quad = rad + ax + 0.5 * float(
            np.einsum("ij,ij,ij,ij->", w, veff, delta, delta)
        )
        power = float(
            np.einsum(
                "ij,ij->", w, eval_R_increment(nonlinearity, base, delta)
            )
        )
    return linear + quad + power


def gradient(
    u: Field,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
) -> Field:
    """Gradient of the discrete J in the weighted inner product.

    grad J(u) = -Lap u + V u + W'(u), with -Lap the operator adjoint to
    the discrete kinetic form.  A central finite difference of energy()
    along any direction matches inner(gradient(u), direction) to the
    truncation order of the difference, with no discretization gap.
    """
    potential = _as_potential(u.grid, potential)
    lap = apply_neg_laplacian(u)
    vals = lap.values + potential * u.values + eval_W_prime(nonlinearity, u.values)
    return Field(u.grid, vals)


def lambda_estimate(u: Field, grad: Field) -> float:
    """Rayleigh quotient estimate of the Lagrange multiplier.

    For the constrained problem on the sphere of mass rho^2 the
    stationarity condition is grad J(u) = lam u, and the best l2 estimate
    given any u is inner(grad, u) / inner(u, u).
    """
    mass = l2_norm_sq(u)
    if mass <= 0.0:
        raise ValueError("lambda estimate needs a nonzero field")
    return inner(grad, u) / mass


def euler_lagrange_residual(u: Field, grad: Field, lam: float | None = None) -> float:
    """Weighted L2 norm of grad J(u) - lam * u.

    With the Rayleigh value of lam (the default) this is exactly the norm
    of the projection of the gradient onto the tangent space of the mass
    sphere at u, the quantity a constrained minimizer must annihilate.
    """
    if lam is None:
        lam = lambda_estimate(u, grad)
    diff = grad.values - lam * u.values
    return float(np.sqrt(np.sum(u.grid.weights * diff**2)))


def el_residual(
    u: Field,
    lam: float,
    potential: PotentialSpec | NDArray[np.float64],
    nonlinearity: NonlinearitySpec,
) -> float:
    """Stationarity residual assembled from scratch at a given multiplier.

    Convenience form of euler_lagrange_residual for callers that do not
    already hold the gradient.
    """
    return euler_lagrange_residual(u, gradient(u, potential, nonlinearity), lam)


def dilate(u: Field, theta: float) -> Field:
    """Mass-rescaling dilation u_theta(x) = u(x / theta**(2/N)).

    In the continuum every derivative-free integral picks up the volume
    factor theta**2: the mass moves to the sphere of radius theta * rho
    and int W(u_theta) = theta**2 int W(u).  The kinetic term picks up
    only theta**(2 - 4/N), strictly smaller for theta > 1, which is what
    makes the squared c-norm grow strictly slower than theta**2.  The
    discrete version interpolates linearly, so those identities hold up
    to interpolation error.

    Args:
        u: Field to dilate.
        theta: Dilation parameter, at least 1.

    Raises:
        SupportOverflowError: if the stretched support no longer fits in
            the box, where truncation would silently break the scaling
            identities.
    """
    if theta < 1.0:
        raise ValueError(f"dilate requires theta >= 1, got {theta}")
    g = u.grid
    if theta == 1.0:
        return u
    sigma = theta ** (2.0 / g.spec.N)
    amax = float(np.max(np.abs(u.values)))
    if amax > 0.0:
        support = np.abs(u.values) > _SUPPORT_TOL * amax
        rows = np.any(support, axis=1)
        r_supp = float(np.max(g.r[rows]))
        if sigma * r_supp > g.spec.r_max:
            raise SupportOverflowError(
                f"dilation by theta={theta} needs radius {sigma * r_supp:.3g}, "
                f"box ends at {g.spec.r_max:.3g}"
            )
        if g.spec.n_z > 1:
            cols = np.any(support, axis=0)
            z_supp = float(np.max(np.abs(g.z[cols])))
            if sigma * z_supp > g.spec.z_max:
                raise SupportOverflowError(
                    f"dilation by theta={theta} needs axial reach "
                    f"{sigma * z_supp:.3g}, box ends at {g.spec.z_max:.3g}"
                )
    r_aug, z_aug, v_aug = _augmented_axes(u)
    r_src = g.r / sigma
    if g.spec.n_z == 1:
        out = np.interp(r_src, r_aug, v_aug[:, 0], left=v_aug[0, 0], right=0.0)
        return Field(g, out[:, None])
    interp = RegularGridInterpolator(
        (r_aug, z_aug), v_aug, method="linear", bounds_error=False, fill_value=0.0
    )
    rr, zz = np.meshgrid(r_src, g.z / sigma, indexing="ij")
    out = interp(np.stack([rr.ravel(), zz.ravel()], axis=-1)).reshape(g.shape)
    return Field(g, out)


def hydrogen_specs(ell: float, Omega: float, p: float, N: int = 3) -> tuple[
    PotentialSpec, NonlinearitySpec
]:
    """Potential and nonlinearity making up the hydrogen-type functional

        G(u) = 1/2 int |grad u|^2
             + 1/2 int (ell^2/r^2 + Omega - 1/|x|) u^2
             - 1/p int |u|^p.

    The mass shift Omega is carried inside the potential, so the
    effective linear potential is exactly the sampled V and the
    nonlinearity is the bare attractive power.

    Raises:
        ValueError: unless ell != 0, Omega > 1, and 2 < p < 2 + 4/N.
    """
    if ell == 0.0:
        raise ValueError("the hydrogen functional requires ell != 0")
    if not Omega > 1.0:
        raise ValueError(f"the hydrogen functional requires Omega > 1, got {Omega}")
    if not 2.0 < p < 2.0 + 4.0 / N:
        raise ValueError(
            f"the hydrogen functional requires 2 < p < 2 + 4/N = "
            f"{2.0 + 4.0 / N:.6g}, got p={p}"
        )
    pot = PotentialSpec(vortex_ell=ell, coulomb=True, shift=Omega)
    nl = NonlinearitySpec(Omega=0.0, kind="power_attractive", p=p)
    return pot, nl


def hydrogen_effective_potential(grid: Grid, ell: float, Omega: float) -> NDArray[np.float64]:
    """Sample ell^2/r^2 + Omega - 1/|x| on a grid.

    Its infimum over the half plane is Omega - 1/(4 ell^2), attained at
    r = 2 ell^2 on the symmetry plane, so it is pointwise positive for
    the admissible couplings.
    """
    if grid.spec.k != 2:
        raise ValueError("the hydrogen potential lives on k = 2 grids")
    if ell == 0.0:
        raise ValueError("the hydrogen potential requires ell != 0")
    pot = PotentialSpec(vortex_ell=ell, coulomb=True, shift=Omega)
    return potential_on_grid(pot, grid)


def hydrogen_energy(u: Field, ell: float, Omega: float, p: float) -> EnergyBreakdown:
    """Breakdown of the hydrogen-type functional G(u).

    The potential component carries the full quadratic form, vortex and
    Coulomb terms with the Omega shift folded in, so it is nonnegative
    for the admissible couplings; the nonlinear component is the bare
    attractive power integral.
    """
    g = u.grid
    if g.spec.k != 2:
        raise ValueError("the hydrogen functional lives on k = 2 grids")
    pot, nl = hydrogen_specs(ell, Omega, p, N=g.spec.N)
    v_vals = potential_on_grid(pot, g)
    return energy(u, v_vals, nl)
