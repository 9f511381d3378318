"""Model primitives: confined single-site potentials, grids, path containers.

The state space is the open box (-s, s)^N.  A confining potential U1 blows
up at +-s and its derivative supplies the single-site drift -U1'(x).  Grids
are uniform with G = kappa * substeps steps over [0, horizon]; the freeze
points used by the piecewise-frozen dynamics sit exactly at indices
k * substeps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

__all__ = [
    "DomainError",
    "QuadratureError",
    "ModelParams",
    "Potential",
    "InitialLaw",
    "PathEnsemble",
    "ConfinementReport",
    "log_barrier",
    "double_well",
    "custom_potential",
    "point_mass",
    "uniform_symmetric",
    "u1_eval",
    "u1_prime",
    "u1_double_prime",
    "grid_times",
    "confinement_check",
    "max_negative_curvature",
    "max_drift_magnitude",
]


class DomainError(ValueError):
    """Raised when a potential is evaluated at |x| >= s."""


class QuadratureError(RuntimeError):
    """Raised when the confinement quadrature cannot certify a value."""


@dataclass(frozen=True)
class ModelParams:
    """Static description of one simulation.

    Attributes
    ----------
    n_particles : int
        Number of interacting coordinates N.
    beta : float
        Interaction strength, >= 0.
    s_bound : float
        Half-width s of the confining box.
    horizon : float
        Final time T.
    kappa : int
        Number of freeze sub-intervals.
    substeps : int
        Euler steps per sub-interval; the grid step is
        horizon / (kappa * substeps).
    master_seed : int
        Root of the seed-derivation tree, uint64.
    """

    n_particles: int
    beta: float
    s_bound: float
    horizon: float
    kappa: int
    substeps: int
    master_seed: int

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if not self.s_bound > 0:
            raise ValueError("s_bound must be > 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if self.kappa < 1 or self.substeps < 1:
            raise ValueError("kappa and substeps must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a uint64")

    @property
    def n_steps(self) -> int:
        return self.kappa * self.substeps

    @property
    def grid_step(self) -> float:
        return self.horizon / (self.kappa * self.substeps)

    @property
    def freeze_indices(self) -> np.ndarray:
        """Grid indices of the freeze points t_k = k * substeps * grid_step."""
        return np.arange(self.kappa + 1) * self.substeps


def grid_times(params: ModelParams) -> np.ndarray:
    """Uniform grid 0, h, 2h, ..., G*h with h = horizon / (kappa * substeps).

    Times are computed as ``index * h`` so the freeze point at index
    k * substeps is bit-identical to k * substeps * h.
    """
    return np.arange(params.n_steps + 1) * params.grid_step


@dataclass(frozen=True)
class Potential:
    """Single-site potential on (-s, s) given by value/derivative maps."""

    kind: str
    s_bound: float
    _u1: Callable = field(repr=False)
    _du1: Callable = field(repr=False)
    _d2u1: Callable = field(repr=False)


def log_barrier(s: float) -> Potential:
    """U1(x) = -log(s^2 - x^2), the minimal confining barrier."""
    s2 = float(s) * float(s)

    def u1(x):
        return -np.log(s2 - x * x)

    def du1(x):
        return 2.0 * x / (s2 - x * x)

    def d2u1(x):
        x2 = x * x
        return (2.0 * s2 + 2.0 * x2) / ((s2 - x2) * (s2 - x2))

    return Potential("logbarrier", float(s), u1, du1, d2u1)


def double_well(s: float) -> Potential:
    """U1(x) = -log(s^2 - x^2) - x^2 + x^4/3.

    For s = 2 this has stationary points at x = 0 and x = +-1.
    """
    s2 = float(s) * float(s)

    def u1(x):
        x2 = x * x
        return -np.log(s2 - x2) - x2 + x2 * x2 / 3.0

    def du1(x):
        x2 = x * x
        return 2.0 * x / (s2 - x2) - 2.0 * x + (4.0 / 3.0) * x2 * x

    def d2u1(x):
        x2 = x * x
        return (2.0 * s2 + 2.0 * x2) / ((s2 - x2) * (s2 - x2)) - 2.0 + 4.0 * x2

    return Potential("doublewell", float(s), u1, du1, d2u1)


def custom_potential(u1: Callable, u1p: Callable, u1pp: Callable, s: float) -> Potential:
    """Wrap user-supplied value/derivative maps defined on (-s, s)."""
    return Potential("custom", float(s), u1, u1p, u1pp)


def _checked(p: Potential, x, fn) -> np.ndarray | float:
    arr = np.asarray(x, dtype=float)
    mask = np.abs(arr) >= p.s_bound
    if np.any(mask):
        bad = np.atleast_1d(arr)[np.atleast_1d(mask)]
        raise DomainError(
            f"potential {p.kind} evaluated outside (-{p.s_bound}, {p.s_bound}) "
            f"at position(s) {bad.tolist()}"
        )
    out = fn(arr)
    return float(out) if arr.ndim == 0 else out


def u1_eval(p: Potential, x):
    """U1(x); raises DomainError when |x| >= s."""
    return _checked(p, x, p._u1)


def u1_prime(p: Potential, x):
    """U1'(x); raises DomainError when |x| >= s."""
    return _checked(p, x, p._du1)


def u1_double_prime(p: Potential, x):
    """U1''(x); raises DomainError when |x| >= s."""
    return _checked(p, x, p._d2u1)


@dataclass(frozen=True)
class ConfinementReport:
    """Result of the boundary-divergence probe."""

    levels: tuple
    probe_points: tuple
    values: tuple
    growth: float
    passed: bool


def confinement_check(p: Potential, levels=(1, 2, 3, 4, 5, 6), growth_factor: float = 100.0) -> ConfinementReport:
    """Probe whether F(x) = int_0^x e^{2 U1(t)} int_0^t e^{-2 U1(v)} dv dt diverges.

    F is evaluated at x_j = s * (1 - 10^-j).  Divergence of F at the boundary
    is what keeps trajectories inside the box; the check passes when the
    probe values increase strictly in j and the last exceeds the first by
    ``growth_factor``.  This is a heuristic: it certifies growth across the
    probed levels, not the limit itself.
    """
    s = p.s_bound

    def inner(t):
        val, _ = integrate.quad(lambda v: math.exp(-2.0 * p._u1(v)), 0.0, t, limit=200)
        return val

    def outer_integrand(t):
        return math.exp(2.0 * p._u1(t)) * inner(t)

    values = []
    points = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for j in levels:
            x = s * (1.0 - 10.0 ** (-j))
            points.append(x)
            # split at decade distances from the boundary; the integrand can
            # rise by orders of magnitude per decade, which defeats a single
            # adaptive pass over [0, x]
            breaks = [0.0]
            breaks += [s * (1.0 - 10.0 ** (-i)) for i in range(1, math.ceil(j))]
            breaks.append(x)
            val = 0.0
            abserr = 0.0
            for a, b in zip(breaks, breaks[1:]):
                if b <= a:
                    continue
                piece, piece_err = integrate.quad(outer_integrand, a, b, limit=400)
                val += piece
                abserr += piece_err
            if not math.isfinite(val) or (val != 0 and abserr > 0.01 * abs(val)):
                raise QuadratureError(
                    f"confinement quadrature unreliable at level {j} "
                    f"(x = {x}): value {val}, error estimate {abserr}"
                )
            values.append(val)

    increasing = all(b > a for a, b in zip(values, values[1:]))
    growth = values[-1] / values[0] if values[0] > 0 else math.inf
    passed = increasing and growth > growth_factor
    return ConfinementReport(tuple(levels), tuple(points), tuple(values), growth, passed)


def max_negative_curvature(p: Potential, n_points: int = 200001, margin: float = 1e-6) -> float:
    """sup of -U1'' over a dense grid in |x| <= s * (1 - margin).

    For barrier-type potentials -U1'' falls to -inf at the boundary, so the
    interior grid captures the supremum.
    """
    xs = np.linspace(-p.s_bound * (1.0 - margin), p.s_bound * (1.0 - margin), n_points)
    return float(np.max(-p._d2u1(xs)))


def max_drift_magnitude(p: Potential, eps: float, n_points: int = 200001) -> float:
    """sup of |U1'| over the closed interval |x| <= s - eps."""
    if not 0 < eps < p.s_bound:
        raise ValueError("eps must lie in (0, s_bound)")
    xs = np.linspace(-(p.s_bound - eps), p.s_bound - eps, n_points)
    return float(np.max(np.abs(p._du1(xs))))


@dataclass(frozen=True)
class InitialLaw:
    """Initial coordinate law, i.i.d. across particles, supported in (-s, s).

    kind "point" places all mass at ``value``; kind "uniform" spreads it on
    (-value, value).
    """

    kind: str
    value: float
    s_bound: float

    def __post_init__(self):
        if self.kind == "point":
            if not abs(self.value) < self.s_bound:
                raise ValueError(
                    f"point mass at {self.value} lies outside (-{self.s_bound}, {self.s_bound})"
                )
        elif self.kind == "uniform":
            if not 0 < self.value < self.s_bound:
                raise ValueError(
                    f"uniform half-width must lie in (0, {self.s_bound}), got {self.value}"
                )
        else:
            raise ValueError(f"unknown initial law kind {self.kind!r}")


def point_mass(x0: float, s_bound: float) -> InitialLaw:
    return InitialLaw("point", float(x0), float(s_bound))


def uniform_symmetric(a: float, s_bound: float) -> InitialLaw:
    return InitialLaw("uniform", float(a), float(s_bound))


@dataclass(frozen=True)
class PathEnsemble:
    """Trajectories of one simulation: values[i, g] = X^(i) at grid time g*h.

    Arrays are frozen after construction.  All values lie strictly inside
    (-s, s); the integrator's boundary safeguard enforces this and its
    activation count is carried along.
    """

    values: np.ndarray
    grid: np.ndarray
    params: ModelParams
    replica: int = 0
    safeguard_activations: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        grid = np.asarray(self.grid, dtype=float)
        if values.ndim != 2 or values.shape != (self.params.n_particles, self.params.n_steps + 1):
            raise ValueError(
                f"values must have shape (n_particles, n_steps + 1) = "
                f"({self.params.n_particles}, {self.params.n_steps + 1}), got {values.shape}"
            )
        if grid.shape != (self.params.n_steps + 1,):
            raise ValueError("grid length must match n_steps + 1")
        if not np.all(np.abs(values) < self.params.s_bound):
            raise ValueError("trajectory values must stay strictly inside (-s, s)")
        values.flags.writeable = False
        grid.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid", grid)
