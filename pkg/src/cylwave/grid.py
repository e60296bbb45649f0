"""Cell-centered grids, quadrature, and discrete calculus for reduced domains.

A scalar field on R^N that is invariant under rotations of its first k
coordinates reduces to a function of the radial coordinate r and, when
k < N, a single axial coordinate z.  Only the reductions N - k in {0, 1}
are supported.  Every integral carries the induced measure

    sigma_k * r**(k-1) dr dz

where sigma_k is the surface area of the unit sphere in R^k, so discrete
functionals approximate their ambient counterparts with no extra
bookkeeping at call sites.

Nodes are cell centers: r_i = (i + 1/2) dr on (0, r_max) and
z_j = -z_max + (j + 1/2) dz on (-z_max, z_max).  The kinetic form is the
flux form over cell faces with a homogeneous Dirichlet ghost outside the
outer radial face and natural (no flux) closure in z.  The inner radial
face carries zero metric weight for k >= 2, so no regularity condition
has to be imposed at r = 0 by hand.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import RegularGridInterpolator

logger = logging.getLogger(__name__)

__all__ = [
    "SupportOverflowError",
    "GridSpec",
    "Grid",
    "Field",
    "sphere_area",
    "build_grid",
    "field_from_function",
    "integrate",
    "inner",
    "l2_norm_sq",
    "kinetic_energy",
    "kinetic_energy_split",
    "apply_neg_laplacian",
    "translate_z",
    "recenter_z",
    "resample",
]

# Relative l2 mass that translate_z tolerates losing off the axial edges.
_SHIFT_MASS_TOL = 1e-9


class SupportOverflowError(RuntimeError):
    """Raised when an operation would push field support outside the box."""


def sphere_area(k: int) -> float:
    """Surface area of the unit sphere in R^k (2*pi for k=2, 4*pi for k=3)."""
    if k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    return 2.0 * math.pi ** (k / 2.0) / math.gamma(k / 2.0)


@dataclass(frozen=True)
class GridSpec:
    """Declarative description of a reduced computational box.

    Attributes:
        N: Ambient space dimension, at least 3.
        k: Number of coordinates collapsed into the radial variable,
            with 2 <= k <= N and N - k in {0, 1}.
        r_max: Outer radius of the box, must be positive.
        n_r: Number of radial cells, at least 2.
        z_max: Half-width of the axial interval (-z_max, z_max).  Must be
            0.0 when k == N and positive otherwise.
        n_z: Number of axial cells.  Must be 1 when k == N and at least 2
            otherwise.
    """

    N: int
    k: int
    r_max: float
    n_r: int
    z_max: float = 0.0
    n_z: int = 1

    def __post_init__(self) -> None:
        if self.N < 3:
            raise ValueError(f"N must be >= 3, got {self.N}")
        if not 2 <= self.k <= self.N:
            raise ValueError(f"k must satisfy 2 <= k <= N, got k={self.k}, N={self.N}")
        if self.N - self.k not in (0, 1):
            raise ValueError(
                f"only reductions with N - k in {{0, 1}} are supported, "
                f"got N={self.N}, k={self.k}"
            )
        if not (math.isfinite(self.r_max) and self.r_max > 0.0):
            raise ValueError(f"r_max must be positive and finite, got {self.r_max}")
        if self.n_r < 2:
            raise ValueError(f"n_r must be >= 2, got {self.n_r}")
        if self.k == self.N:
            if self.n_z != 1 or self.z_max != 0.0:
                raise ValueError(
                    "purely radial grids (k == N) require n_z == 1 and z_max == 0.0, "
                    f"got n_z={self.n_z}, z_max={self.z_max}"
                )
        else:
            if not (math.isfinite(self.z_max) and self.z_max > 0.0):
                raise ValueError(
                    f"z_max must be positive and finite when k < N, got {self.z_max}"
                )
            if self.n_z < 2:
                raise ValueError(f"n_z must be >= 2 when k < N, got {self.n_z}")

    @property
    def z_dims(self) -> int:
        """Number of axial dimensions (0 or 1)."""
        return self.N - self.k


@dataclass(frozen=True)
class Grid:
    """Realized grid: node coordinates, metric factors, quadrature weights.

    Attributes:
        spec: The GridSpec this grid was built from.
        r: Radial cell centers, shape (n_r,).
        z: Axial cell centers, shape (n_z,).  Equals [0.0] when k == N.
        dr: Radial cell width.
        dz: Axial cell width.  Doubles as the axial quadrature factor and
            is set to 1.0 for purely radial grids.
        r_pow: r**(k-1) at the cell centers.
        face_pow: (i*dr)**(k-1) at the radial faces i = 0..n_r.
        w_r: Radial line weights sigma_k * r**(k-1) * dr, shape (n_r,).
        weights: Full quadrature weights w_r[:, None] * dz, shape (n_r, n_z).
        sphere: sigma_k, the unit sphere area in R^k.
    """

    spec: GridSpec
    r: NDArray[np.float64]
    z: NDArray[np.float64]
    dr: float
    dz: float
    r_pow: NDArray[np.float64]
    face_pow: NDArray[np.float64]
    w_r: NDArray[np.float64]
    weights: NDArray[np.float64]
    sphere: float

    @property
    def n_r(self) -> int:
        return self.spec.n_r

    @property
    def n_z(self) -> int:
        return self.spec.n_z

    @property
    def shape(self) -> tuple[int, int]:
        return (self.spec.n_r, self.spec.n_z)

    @property
    def volume(self) -> float:
        """Quadrature measure of the whole box."""
        return float(np.sum(self.weights))


def build_grid(spec: GridSpec) -> Grid:
    """Construct the grid realization of a GridSpec."""
    dr = spec.r_max / spec.n_r
    r = (np.arange(spec.n_r) + 0.5) * dr
    if spec.k == spec.N:
        z = np.zeros(1)
        dz = 1.0
    else:
        dz = 2.0 * spec.z_max / spec.n_z
        z = -spec.z_max + (np.arange(spec.n_z) + 0.5) * dz
    sphere = sphere_area(spec.k)
    r_pow = r ** (spec.k - 1)
    face_pow = (np.arange(spec.n_r + 1) * dr) ** (spec.k - 1)
    w_r = sphere * r_pow * dr
    weights = w_r[:, None] * dz * np.ones((1, spec.n_z))
    grid = Grid(
        spec=spec,
        r=r,
        z=z,
        dr=dr,
        dz=dz,
        r_pow=r_pow,
        face_pow=face_pow,
        w_r=w_r,
        weights=weights,
        sphere=sphere,
    )
    logger.debug(
        "built grid N=%d k=%d shape=%s volume=%.6g", spec.N, spec.k, grid.shape, grid.volume
    )
    return grid


@dataclass(frozen=True)
class Field:
    """A real scalar field sampled at the cell centers of a grid.

    Values are validated to be finite on construction so that numerical
    blow-ups surface immediately instead of propagating NaNs.
    """

    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field values have shape {values.shape}, expected {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)

    def with_values(self, values: NDArray[np.float64]) -> "Field":
        """Return a new field on the same grid with replaced values."""
        return Field(self.grid, values)


def field_from_function(
    grid: Grid, fn: Callable[[NDArray[np.float64], NDArray[np.float64]], NDArray[np.float64]]
) -> Field:
    """Sample fn(r, z) at the cell centers.

    The callable receives broadcastable coordinate arrays of shape
    (n_r, 1) and (1, n_z); for purely radial grids the z argument is a
    single zero.
    """
    rr = grid.r[:, None]
    zz = grid.z[None, :]
    values = np.broadcast_to(np.asarray(fn(rr, zz), dtype=np.float64), grid.shape)
    return Field(grid, np.array(values))


def _check_same_grid(a: Field, b: Field) -> None:
    if a.grid is not b.grid and a.grid.shape != b.grid.shape:
        raise ValueError("fields live on different grids")


def integrate(u: Field) -> float:
    """Quadrature of u against the reduced measure."""
    return float(np.sum(u.grid.weights * u.values))


def inner(a: Field, b: Field) -> float:
    """Weighted L2 inner product of two fields on the same grid."""
    _check_same_grid(a, b)
    return float(np.einsum("ij,ij,ij->", a.grid.weights, a.values, b.values))


def l2_norm_sq(u: Field) -> float:
    """Squared weighted L2 norm, the discrete mass of u."""
    return float(np.einsum("ij,ij,ij->", u.grid.weights, u.values, u.values))


def _kinetic_raw_split(grid: Grid, v: NDArray[np.float64]) -> tuple[float, float]:
    """Kinetic split on a raw value array, single-pass reductions."""
    fp = grid.face_pow
    diff_r = v[1:] - v[:-1]
    edge = float(np.einsum("j,j->", v[-1], v[-1])) * fp[-1]
    radial = (0.5 * grid.sphere * grid.dz / grid.dr) * (
        float(np.einsum("ij,ij,i->", diff_r, diff_r, fp[1:-1])) + edge
    )
    if grid.spec.n_z == 1:
        return radial, 0.0
    diff_z = v[:, 1:] - v[:, :-1]
    axial = (0.5 * grid.sphere * grid.dr / grid.dz) * float(
        np.einsum("ij,ij,i->", diff_z, diff_z, grid.r_pow)
    )
    return radial, axial


def kinetic_energy_split(u: Field) -> tuple[float, float]:
    """Radial and axial parts of the kinetic energy (1/2) int |grad u|^2.

    The radial part sums face fluxes against the face metric
    sigma_k * (i*dr)**(k-1), with a zero Dirichlet ghost outside the
    outer face.  The axial part uses interior faces only, which is the
    natural closure: a z-independent field has exactly zero axial energy.
    """
    return _kinetic_raw_split(u.grid, u.values)


def kinetic_energy(u: Field) -> float:
    """Total discrete kinetic energy (1/2) int |grad u|^2."""
    radial, axial = _kinetic_raw_split(u.grid, u.values)
    return radial + axial


def _neg_laplacian_raw(grid: Grid, v: NDArray[np.float64]) -> NDArray[np.float64]:
    """-Laplacian applied to a raw value array, no Field wrapping."""
    n_z = grid.spec.n_z
    zeros = np.zeros((1, n_z))
    vpad = np.concatenate([zeros, v, zeros], axis=0)
    # Face flux density (i*dr)**(k-1) * (u_i - u_{i-1}); the i=0 entry is
    # annihilated by the metric and the i=n_r entry sees the Dirichlet ghost.
    dflux = grid.face_pow[:, None] * (vpad[1:] - vpad[:-1])
    out = (dflux[:-1] - dflux[1:]) / (grid.r_pow[:, None] * grid.dr**2)
    if n_z > 1:
        flux_z = np.diff(v, axis=1) / grid.dz
        zcol = np.zeros((grid.spec.n_r, 1))
        fpad = np.concatenate([zcol, flux_z, zcol], axis=1)
        out = out + (fpad[:, :-1] - fpad[:, 1:]) / grid.dz
    return out


def apply_neg_laplacian(u: Field) -> Field:
    """Apply the discrete -Laplacian induced by the kinetic form.

    The operator is defined as the gradient of the kinetic quadratic form
    with respect to the weighted inner product, so it is symmetric in that
    inner product to rounding and satisfies
    inner(apply_neg_laplacian(u), u) == 2 * kinetic_energy(u) exactly up
    to roundoff.
    """
    return Field(u.grid, _neg_laplacian_raw(u.grid, u.values))


def translate_z(u: Field, shift_cells: int) -> Field:
    """Shift a field by an integer number of axial cells, zero filling.

    Raises:
        SupportOverflowError: if more than a 1e-9 relative share of the
            squared mass would be pushed off the axial edges.
        ValueError: if the grid has no axial direction.
    """
    g = u.grid
    if g.spec.n_z == 1:
        raise ValueError("translate_z requires an axial direction (k < N)")
    if shift_cells == 0:
        return u
    n_z = g.spec.n_z
    total = l2_norm_sq(u)
    out = np.zeros_like(u.values)
    s = int(shift_cells)
    if abs(s) >= n_z:
        lost = total
    elif s > 0:
        lost = float(np.sum(g.weights[:, n_z - s :] * u.values[:, n_z - s :] ** 2))
        out[:, s:] = u.values[:, : n_z - s]
    else:
        lost = float(np.sum(g.weights[:, :-s] * u.values[:, :-s] ** 2))
        out[:, :s] = u.values[:, -s:]
    if total > 0.0 and lost > _SHIFT_MASS_TOL * total:
        raise SupportOverflowError(
            f"axial shift by {s} cells would drop a {lost / total:.3e} "
            "relative share of the squared mass"
        )
    return Field(g, out)


def recenter_z(u: Field) -> tuple[Field, int]:
    """Shift a field so its axial mass centroid sits nearest to z = 0.

    Returns the shifted field and the applied integer cell shift.  Purely
    radial fields are returned unchanged with shift 0.
    """
    g = u.grid
    if g.spec.n_z == 1:
        return u, 0
    total = l2_norm_sq(u)
    if total <= 0.0:
        return u, 0
    centroid = float(np.sum(g.weights * u.values**2 * g.z[None, :])) / total
    shift = -int(round(centroid / g.dz))
    if shift == 0:
        return u, 0
    return translate_z(u, shift), shift


def _augmented_axes(u: Field) -> tuple[NDArray, NDArray, NDArray]:
    """Node and value arrays extended by one ghost node on each side.

    The inner radial ghost mirrors the first value (even extension through
    the axis), the outer radial ghost negates the last value so a linear
    interpolant vanishes at the Dirichlet face, and axial ghosts are zero.
    """
    g = u.grid
    r_aug = np.concatenate([[-g.r[0]], g.r, [g.spec.r_max + 0.5 * g.dr]])
    vals = u.values
    v_aug = np.concatenate([vals[:1, :], vals, -vals[-1:, :]], axis=0)
    if g.spec.n_z == 1:
        return r_aug, g.z, v_aug
    z_aug = np.concatenate([[g.z[0] - g.dz], g.z, [g.z[-1] + g.dz]])
    zeros = np.zeros((v_aug.shape[0], 1))
    v_aug = np.concatenate([zeros, v_aug, zeros], axis=1)
    return r_aug, z_aug, v_aug


def resample(u: Field, target: Grid) -> Field:
    """Linearly interpolate a field onto another grid.

    Intended for prolongation in warm starts.  Points of the target grid
    outside the source box evaluate to zero.  The interpolant respects the
    boundary model of the source grid, even through the axis and vanishing
    at the outer Dirichlet face.
    """
    if u.grid.spec.N != target.spec.N or u.grid.spec.k != target.spec.k:
        raise ValueError("resample requires matching (N, k) between grids")
    r_aug, z_aug, v_aug = _augmented_axes(u)
    if u.grid.spec.n_z == 1:
        out = np.interp(target.r, r_aug, v_aug[:, 0], left=v_aug[0, 0], right=0.0)
        return Field(target, out[:, None])
    interp = RegularGridInterpolator(
        (r_aug, z_aug), v_aug, method="linear", bounds_error=False, fill_value=0.0
    )
    rr, zz = np.meshgrid(target.r, target.z, indexing="ij")
    pts = np.stack([rr.ravel(), zz.ravel()], axis=-1)
    out = interp(pts).reshape(target.shape)
    return Field(target, out)
