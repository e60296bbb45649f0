"""Potentials, nonlinear terms, and structural hypothesis checks.

The energy functional studied by this package is

    J(u) = int ( 1/2 |grad u|^2 + 1/2 V u^2 + W(u) ) dmu

with W(s) = Omega/2 s^2 + R(s).  The admissible class is carved out by
pointwise hypotheses on V and growth hypotheses on R.  This module owns
the closed-form evaluation of V, W, and their derivatives, together with
numerical verification of the hypotheses on sample grids.

Singular radial potentials are composed from three ingredients that can
be mixed freely: a vortex term ell^2 / r^2, a general inverse power
c / r^alpha, and a constant shift.  An attractive Coulomb well -1/|x|
with |x| = sqrt(r^2 + z^2) can be added on top for the hydrogen-type
functional; it is the one ingredient that breaks pure radial dependence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import InitVar, dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .grid import Grid

logger = logging.getLogger(__name__)

__all__ = [
    "PotentialSpec",
    "NonlinearitySpec",
    "HypothesisReport",
    "eval_potential",
    "potential_on_grid",
    "eval_R",
    "eval_R_prime",
    "eval_W",
    "eval_W_prime",
    "negative_well_root",
    "check_V_hypotheses",
    "check_W_hypotheses",
]

# Slack used when verifying inequalities that hold with equality in exact
# arithmetic, sized for double precision accumulation error.
_EQ_SLACK = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """Composite external potential.

    V(r, z) = vortex_ell^2 / r^2 + power_coeff / r^power_alpha + shift
              - [coulomb] / sqrt(r^2 + z^2)

    Attributes:
        vortex_ell: Angular momentum quantum number of the vortex term.
        power_alpha: Exponent of the inverse power term, in (0, 2] when used.
        power_coeff: Coefficient of the inverse power term, nonnegative.
        coulomb: Whether to include the attractive -1/|x| well.
        shift: Constant offset added to V.
        validate: Pass False to skip the coupling constraints on the
            Coulomb well.  Off-label combinations remain evaluable, they
            just fall outside the class for which the variational theory
            is developed.
    """

    vortex_ell: float = 0.0
    power_alpha: float = 0.0
    power_coeff: float = 0.0
    coulomb: bool = False
    shift: float = 0.0
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        for name in ("vortex_ell", "power_alpha", "power_coeff", "shift"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.power_coeff < 0.0:
            raise ValueError(f"power_coeff must be >= 0, got {self.power_coeff}")
        if self.power_coeff > 0.0 and not 0.0 < self.power_alpha <= 2.0:
            raise ValueError(
                f"power_alpha must lie in (0, 2] when power_coeff > 0, "
                f"got {self.power_alpha}"
            )
        if validate and self.coulomb:
            if self.vortex_ell == 0.0:
                raise ValueError(
                    "the Coulomb well requires a vortex term (vortex_ell != 0) "
                    "to control the singularity at the axis"
                )
            if self.shift <= 1.0:
                raise ValueError(
                    f"the Coulomb well requires shift > 1, got {self.shift}"
                )

    @property
    def is_radial(self) -> bool:
        """True when V depends on r alone."""
        return not self.coulomb


def eval_potential(
    spec: PotentialSpec,
    r: NDArray[np.float64],
    z: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    """Evaluate V at given coordinates.

    Args:
        spec: Potential description.
        r: Radial coordinates, strictly positive.
        z: Axial coordinates, broadcastable against r.  Required when the
            spec includes the Coulomb well, optional otherwise.

    Raises:
        ValueError: on nonpositive radii, where the singular terms are
            not defined, or when z is missing but needed.
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0.0):
        raise ValueError("eval_potential requires strictly positive radii")
    out = np.full(np.shape(r), spec.shift, dtype=np.float64)
    if spec.vortex_ell != 0.0:
        out = out + spec.vortex_ell**2 / r**2
    if spec.power_coeff != 0.0:
        out = out + spec.power_coeff / r**spec.power_alpha
    if spec.coulomb:
        if z is None:
            raise ValueError("the Coulomb well needs axial coordinates")
        z = np.asarray(z, dtype=np.float64)
        out = out - 1.0 / np.sqrt(r**2 + z**2)
    return out


def potential_on_grid(spec: PotentialSpec, grid: Grid) -> NDArray[np.float64]:
    """Sample V at every cell center of a grid, shape (n_r, n_z)."""
    rr = grid.r[:, None]
    zz = grid.z[None, :]
    vals = eval_potential(spec, rr, zz)
    return np.broadcast_to(vals, grid.shape).copy()


@dataclass(frozen=True)
class NonlinearitySpec:
    """The mass term Omega/2 s^2 plus a perturbation R(s).

    Supported kinds:
        "none": R = 0.
        "power_attractive": R(s) = -|s|^p / p with p > 2.

    The remaining attributes are witnesses for the growth hypotheses on
    R.  When left as None they default to the natural witnesses of the
    chosen kind: b1 = 0, b2 = 2/p, gamma = p for the lower bound and
    c1 = 0, c2 = 1, q1 = q2 = p for the derivative bound.

    The dimension-dependent exponent windows (gamma below the mass
    critical exponent, q2 below the Sobolev critical exponent) are not
    enforced here because supercritical powers are legitimate objects of
    study, they simply lose the compactness and coercivity conclusions.
    Call validate_for_dimension or check_W_hypotheses to test them.
    """

    Omega: float
    kind: str = "power_attractive"
    p: float = 3.0
    b1: Optional[float] = None
    b2: Optional[float] = None
    gamma: Optional[float] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    q1: Optional[float] = None
    q2: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.Omega):
            raise ValueError(f"Omega must be finite, got {self.Omega}")
        if self.kind not in ("none", "power_attractive"):
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "power_attractive" and not self.p > 2.0:
            raise ValueError(f"power_attractive requires p > 2, got {self.p}")
        for name in ("b1", "c1"):
            value = getattr(self, name)
            if value is not None and value < 0.0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        for name in ("b2", "c2"):
            value = getattr(self, name)
            if value is not None and value <= 0.0:
                raise ValueError(f"{name} must be > 0, got {value}")

    def lower_bound_witness(self) -> tuple[float, float, float]:
        """(b1, b2, gamma) such that R(s) > -b1 s^2 - b2 |s|^gamma away from 0."""
        if self.kind == "none":
            b1 = 0.0 if self.b1 is None else self.b1
            b2 = 1.0 if self.b2 is None else self.b2
            gamma = 2.0 if self.gamma is None else self.gamma
            return b1, b2, gamma
        b1 = 0.0 if self.b1 is None else self.b1
        b2 = 2.0 / self.p if self.b2 is None else self.b2
        gamma = self.p if self.gamma is None else self.gamma
        return b1, b2, gamma

    def derivative_bound_witness(self) -> tuple[float, float, float, float]:
        """(c1, c2, q1, q2) with |R'(s)| <= c1 |s|^(q1-1) + c2 |s|^(q2-1)."""
        if self.kind == "none":
            c1 = 0.0 if self.c1 is None else self.c1
            c2 = 1.0 if self.c2 is None else self.c2
            q1 = 2.0 if self.q1 is None else self.q1
            q2 = 2.0 if self.q2 is None else self.q2
            return c1, c2, q1, q2
        c1 = 0.0 if self.c1 is None else self.c1
        c2 = 1.0 if self.c2 is None else self.c2
        q1 = self.p if self.q1 is None else self.q1
        q2 = self.p if self.q2 is None else self.q2
        return c1, c2, q1, q2

    def validate_for_dimension(self, N: int) -> None:
        """Enforce the exponent windows that depend on the space dimension.

        Raises:
            ValueError: listing every violated window.
        """
        problems = []
        _, _, gamma = self.lower_bound_witness()
        if not gamma < 2.0 + 4.0 / N:
            problems.append(
                f"gamma={gamma} must be < 2 + 4/N = {2.0 + 4.0 / N:.6g} for N={N}"
            )
        _, _, q1, q2 = self.derivative_bound_witness()
        sobolev = 2.0 * N / (N - 2)
        if not 2.0 <= q1 <= q2:
            problems.append(f"need 2 <= q1 <= q2, got q1={q1}, q2={q2}")
        if not q2 < sobolev:
            problems.append(f"q2={q2} must be < 2N/(N-2) = {sobolev:.6g} for N={N}")
        if problems:
            raise ValueError("; ".join(problems))


def eval_R(spec: NonlinearitySpec, s: NDArray[np.float64]) -> NDArray[np.float64]:
    """R(s)."""
    s = np.asarray(s, dtype=np.float64)
    if spec.kind == "none":
        return np.zeros_like(s)
    return -np.abs(s) ** spec.p / spec.p


def eval_R_prime(spec: NonlinearitySpec, s: NDArray[np.float64]) -> NDArray[np.float64]:
    """R'(s).  Well defined at 0 because p > 2."""
    s = np.asarray(s, dtype=np.float64)
    if spec.kind == "none":
        return np.zeros_like(s)
    return -np.abs(s) ** (spec.p - 2.0) * s


def eval_R_increment(
    spec: NonlinearitySpec,
    base: NDArray[np.float64],
    delta: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Pointwise R(base + delta) - R(base) without subtractive cancellation.

    The difference of powers is expanded so its rounding error is
    proportional to the increment instead of to |s|^p, which is what
    lets an energy comparison resolve tiny decreases on fields whose
    total energy is large.  Integer exponents telescope to exact
    polynomials in delta; for general p the same-sign cells are
    rewritten as |s|^p expm1(p log1p(delta/s)) and the rest fall back
    to the direct difference, which is well conditioned there.
    """
    if spec.kind == "none":
        return np.zeros_like(base)
    p = spec.p
    if p == 3.0:
        # |s|^3 = sign(s) s^3, so on cells where base and base + delta
        # share a sign the difference is an exact cubic in delta.
        out = np.sign(base) * (
            delta * (3.0 * base * base + delta * (3.0 * base + delta))
        )
        flip = base * (base + delta) <= 0.0
        if np.any(flip):
            b = base[flip]
            t = b + delta[flip]
            out[flip] = np.abs(t) ** 3 - np.abs(b) ** 3
        return out / -3.0
    if p == 4.0:
        # |s|^4 = s^4 is a global polynomial; no sign handling at all.
        b2 = base * base
        out = delta * (
            4.0 * b2 * base + delta * (6.0 * b2 + delta * (4.0 * base + delta))
        )
        return out / -4.0
    ap = np.abs(base) ** p
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        series = ap * np.expm1(p * np.log1p(delta / base))
        direct = np.abs(base + delta) ** p - ap
        out = np.where(np.abs(delta) < 0.5 * np.abs(base), series, direct)
    return out / (-p)


def eval_W(spec: NonlinearitySpec, s: NDArray[np.float64]) -> NDArray[np.float64]:
    """W(s) = Omega/2 s^2 + R(s)."""
    s = np.asarray(s, dtype=np.float64)
    return 0.5 * spec.Omega * s**2 + eval_R(spec, s)


def eval_W_prime(spec: NonlinearitySpec, s: NDArray[np.float64]) -> NDArray[np.float64]:
    """W'(s) = Omega s + R'(s)."""
    s = np.asarray(s, dtype=np.float64)
    return spec.Omega * s + eval_R_prime(spec, s)


def negative_well_root(spec: NonlinearitySpec, s_hi: float = 1e6) -> float:
    """Positive root of W(s) = 0, below which W >= 0 and above which W < 0.

    Found by root bracketing on W(s)/s^2 so the trivial root at 0 does
    not interfere.  When Omega <= 0 the well starts at the origin and the
    root is 0.

    Raises:
        ValueError: if W has no sign change on (0, s_hi].
    """
    if spec.kind == "none":
        raise ValueError("W is a pure mass term and never becomes negative")
    if spec.Omega <= 0.0:
        return 0.0

    def profile(s: float) -> float:
        return 0.5 * spec.Omega - s ** (spec.p - 2.0) / spec.p

    lo = 1e-12
    if profile(s_hi) >= 0.0:
        raise ValueError(f"W(s)/s^2 has no sign change on (0, {s_hi}]")
    root = brentq(profile, lo, s_hi, xtol=1e-14, rtol=1e-14)
    return float(root)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of a hypothesis sweep.

    Attributes:
        checks: Map from check name to pass/fail.
        data: Diagnostic scalars gathered along the way (worst margins,
            thresholds, witnesses).
    """

    checks: dict[str, bool]
    data: dict[str, float]

    @property
    def all_ok(self) -> bool:
        return all(self.checks.values())


def check_V_hypotheses(
    spec: PotentialSpec, r: NDArray[np.float64]
) -> HypothesisReport:
    """Verify the pointwise hypotheses on a radial potential.

    The three checks on the sample radii are nonnegativity, decay to zero
    toward the largest radius, and monotone nonincrease.  Decay is judged
    against a tolerance scaled to the sampled magnitude,
    max(1e-3 * V(median radius), 1e-6), since an inverse power tail never
    reaches zero exactly at finite radius.

    Args:
        spec: Radial potential, rejecting Coulomb wells which are not
            functions of r alone.
        r: Strictly increasing positive sample radii.

    Raises:
        ValueError: if the potential is not radial or samples are bad.
    """
    if not spec.is_radial:
        raise ValueError("check_V_hypotheses handles radial potentials only")
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size < 3:
        raise ValueError("need at least 3 sample radii")
    if np.any(np.diff(r) <= 0.0) or r[0] <= 0.0:
        raise ValueError("sample radii must be positive and strictly increasing")
    vals = eval_potential(spec, r)
    v_median = float(eval_potential(spec, np.array([np.median(r)]))[0])
    decay_tol = max(1e-3 * abs(v_median), 1e-6)
    checks = {
        "nonnegative": bool(np.min(vals) >= -_EQ_SLACK),
        "vanishes_at_infinity": bool(abs(vals[-1]) <= decay_tol),
        "nonincreasing": bool(np.max(np.diff(vals)) <= _EQ_SLACK),
    }
    data = {
        "min_value": float(np.min(vals)),
        "tail_value": float(vals[-1]),
        "decay_tol": decay_tol,
        "max_increment": float(np.max(np.diff(vals))),
    }
    return HypothesisReport(checks=checks, data=data)


def check_W_hypotheses(
    spec: NonlinearitySpec, N: int, s: Optional[NDArray[np.float64]] = None
) -> HypothesisReport:
    """Verify the growth and negativity hypotheses on W.

    Five checks: the strict lower bound R(s) > -b1 s^2 - b2 |s|^gamma on
    positive samples, the window gamma < 2 + 4/N, the derivative bound
    |R'| <= c1 |s|^(q1-1) + c2 |s|^(q2-1), the window
    2 <= q1 <= q2 < 2N/(N-2), and the existence of s0 with W(s0) < 0.

    Args:
        spec: Nonlinearity under test.
        N: Ambient dimension, fixing the exponent windows.
        s: Positive sample amplitudes.  Defaults to a wide log grid.
    """
    if s is None:
        s = np.logspace(-6, 3, 400)
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 0.0):
        raise ValueError("sample amplitudes must be strictly positive")

    b1, b2, gamma = spec.lower_bound_witness()
    c1, c2, q1, q2 = spec.derivative_bound_witness()
    r_vals = eval_R(spec, s)
    lower = -b1 * s**2 - b2 * s**gamma
    lower_margin = float(np.min(r_vals - lower))
    rp = np.abs(eval_R_prime(spec, s))
    bound = c1 * s ** (q1 - 1.0) + c2 * s ** (q2 - 1.0)
    deriv_margin = float(np.min(bound - rp))
    sobolev = 2.0 * N / (N - 2)

    checks = {
        "lower_bound": bool(lower_margin > 0.0),
        "gamma_window": bool(gamma < 2.0 + 4.0 / N),
        "derivative_bound": bool(deriv_margin >= -_EQ_SLACK * float(np.max(bound))),
        "exponent_window": bool(2.0 <= q1 <= q2 < sobolev),
        "negative_somewhere": False,
    }
    data = {
        "lower_margin": lower_margin,
        "gamma": gamma,
        "gamma_limit": 2.0 + 4.0 / N,
        "derivative_margin": deriv_margin,
        "q1": q1,
        "q2": q2,
        "q_limit": sobolev,
    }
    try:
        root = negative_well_root(spec)
    except ValueError:
        logger.debug("no negative well for kind=%s Omega=%s", spec.kind, spec.Omega)
    else:
        witness = 2.0 * root if root > 0.0 else 1.0
        w_val = float(eval_W(spec, np.array([witness]))[0])
        checks["negative_somewhere"] = bool(w_val < 0.0)
        data["well_root"] = root
        data["witness_s0"] = witness
        data["witness_W"] = w_val
    return HypothesisReport(checks=checks, data=data)
