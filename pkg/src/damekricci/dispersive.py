"""Dispersive phases and the radial propagator, its maximal function and linearization.

Every spherical sum here has the form

    u(s) = C sum_j phi_{lambda_j}(s) m_j f^(lambda_j) |c(lambda_j)|^-2 w_j

with a unimodular multiplier m_j, so all of them share the cached matrix
of spherical-function values held by the evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import PreconditionError
from .geometry import density
from .spectral import (
    RadialGrid,
    RadialProfile,
    Spectrum,
    euclid_inversion_constant,
    isft,
    synthesis_coefficients,
)
from .specfun import script_j
from .spherical import SphericalEvaluator

__all__ = [
    "Phase",
    "TimeChoice",
    "WaltherConstants",
    "BoundReport",
    "walther_constants",
    "concavity_check",
    "comparable_oscillation",
    "propagate",
    "propagate_euclid",
    "maximal",
    "maximal_with_refinement",
    "default_t_grid",
    "refine_t_grid",
    "linearized",
    "ball_norm",
    "RefinementTrace",
]

_T_CHUNK = 64


# -- phases ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Phase:
    """A radial dispersion relation psi(lambda) of degree ``a``.

    Build instances with :meth:`power_law`, :meth:`shifted_power_law`,
    :meth:`tabulated` or :meth:`custom`.
    """

    form: str
    a: float
    shift: float = 0.0
    nodes: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise PreconditionError(f"phase degree must be positive, got {self.a}")
        if self.form not in ("power_law", "shifted_power_law", "tabulated", "custom"):
            raise PreconditionError(f"unknown phase form {self.form!r}")

    @classmethod
    def power_law(cls, a: float) -> "Phase":
        """psi(lambda) = lambda^a."""
        return cls("power_law", a)

    @classmethod
    def shifted_power_law(cls, a: float, shift: float) -> "Phase":
        """psi(lambda) = (lambda^2 + shift)^(a/2); ``shift = Q^2/4`` gives the Laplacian power."""
        if shift < 0:
            raise PreconditionError("shift must be >= 0")
        return cls("shifted_power_law", a, shift=float(shift))

    @classmethod
    def tabulated(cls, nodes, values, a: float) -> "Phase":
        """Monotone cubic interpolation of samples; beyond the last node psi continues as lambda^a plus the last offset."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise PreconditionError("tabulated phase needs matching 1-D nodes and values (>= 2 samples)")
        if nodes[0] != 0 or np.any(np.diff(nodes) <= 0) or not np.all(np.isfinite(values)):
            raise PreconditionError("tabulated nodes must start at 0, ascend strictly and carry finite values")
        interp = PchipInterpolator(nodes, values, extrapolate=False)
        return cls("tabulated", a, nodes=nodes, values=values, fn=interp)

    @classmethod
    def custom(cls, fn: Callable, a: float) -> "Phase":
        """Any vectorized callable, e.g. ``lambda l: l**a + np.sin(l)``."""
        return cls("custom", a, fn=fn)

    def __call__(self, lam):
        lam = np.abs(np.asarray(lam, dtype=float))
        if self.form == "power_law":
            return lam ** self.a
        if self.form == "shifted_power_law":
            return (lam ** 2 + self.shift) ** (self.a / 2)
        if self.form == "custom":
            return np.asarray(self.fn(lam), dtype=float)
        last = self.nodes[-1]
        inside = lam <= last
        tail = lam ** self.a + (self.values[-1] - last ** self.a)
        return np.where(inside, self.fn(np.minimum(lam, last)), tail)

    def describe(self) -> dict:
        out = {"form": self.form, "a": self.a}
        if self.form == "shifted_power_law":
            out["shift"] = self.shift
        return out


@dataclass(frozen=True)
class WaltherConstants:
    a: float
    beta: float
    c1: float
    c2: float


def walther_constants(a: float, beta: float) -> WaltherConstants:
    """Exponents c1 = 1 - 2 beta and c2 = (4 beta - 2 + a)/(2a - 2) of the oscillatory-integral bound."""
    if not 0 < a < 1:
        raise PreconditionError(f"a must lie in (0, 1), got {a}")
    upper = min(a / 2, 0.25)
    if not a / 4 < beta < upper:
        raise PreconditionError(f"beta must lie in ({a / 4:g}, {upper:g}) for a = {a:g}, got {beta}")
    c1 = 1 - 2 * beta
    c2 = (4 * beta - 2 + a) / (2 * a - 2)
    return WaltherConstants(a, beta, c1, c2)


# -- phase comparisons ---------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """sup of a difference over a frequency grid and whether it looks bounded.

    ``bounded`` compares the sup over the lower half of the grid with the
    sup over the whole grid: a difference that keeps growing with lambda
    raises the latter by more than the relative tolerance.
    """

    sup: float
    sup_lower_half: float
    bounded: bool


def _default_grid(Lambda):
    return np.geomspace(Lambda * 1.01 + 1e-3, max(Lambda, 1.0) * 1e6, 400)


def _bound_report(diff_fn, Lambda, grid, rtol=0.05) -> BoundReport:
    grid = _default_grid(Lambda) if grid is None else np.sort(np.asarray(grid, dtype=float))
    if grid.size < 2 or grid[0] <= Lambda:
        raise PreconditionError("comparison grid must have >= 2 points, all greater than Lambda")
    diff = np.abs(diff_fn(grid))
    full = float(diff.max())
    half = float(diff[: grid.size // 2].max())
    return BoundReport(full, half, bool(full <= half * (1 + rtol) + 1e-12))


def concavity_check(phase: Phase, a: float, Lambda: float = 1.0, grid=None) -> BoundReport:
    """Is psi(lambda) - lambda^a bounded on (Lambda, inf)?  Default grid: 400 log-spaced points up to 1e6 Lambda."""
    return _bound_report(lambda lam: phase(lam) - lam ** a, Lambda, grid)


def comparable_oscillation(phase1: Phase, phase2: Phase, Lambda: float = 1.0, grid=None) -> BoundReport:
    """Is psi1 - psi2 bounded on (Lambda, inf)?"""
    return _bound_report(lambda lam: phase1(lam) - phase2(lam), Lambda, grid)


# -- time choices -------------------------------------------------------------


def _check_times(t, what="t"):
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        raise PreconditionError(f"{what} is empty")
    if not np.all((t > 0) & (t < 1)):
        raise PreconditionError(f"{what} must lie in (0, 1)")
    return t


@dataclass(frozen=True, eq=False)
class TimeChoice:
    """Times at which the propagator is sampled: one value, a grid, or a function of the radius."""

    mode: str
    times: Optional[np.ndarray] = None
    fn: Optional[Callable] = field(default=None, repr=False)

    @classmethod
    def fixed(cls, t: float) -> "TimeChoice":
        return cls("fixed", _check_times(np.array([t])))

    @classmethod
    def grid(cls, times) -> "TimeChoice":
        times = _check_times(times, "t grid")
        if np.any(np.diff(times) <= 0):
            raise PreconditionError("t grid must be strictly ascending")
        return cls("grid", times)

    @classmethod
    def function_of_radius(cls, fn: Callable) -> "TimeChoice":
        return cls("function_of_radius", fn=fn)

    def at(self, radii) -> np.ndarray:
        """t(s) on the given radii (fixed choices broadcast)."""
        radii = np.asarray(radii, dtype=float)
        if self.mode == "fixed":
            return np.full(radii.shape, self.times[0])
        if self.mode == "function_of_radius":
            return _check_times(np.broadcast_to(self.fn(radii), radii.shape), "t(s)")
        raise PreconditionError("a t grid has no single time per radius")


def default_t_grid(count: int = 256) -> np.ndarray:
    """``count`` log-spaced times in (1e-4, 1 - 1e-4)."""
    return np.geomspace(1e-4, 1 - 1e-4, count)


def refine_t_grid(times) -> np.ndarray:
    """Insert the geometric midpoint of each gap; the result contains the input."""
    times = np.asarray(times, dtype=float)
    mids = np.sqrt(times[:-1] * times[1:])
    out = np.empty(2 * times.size - 1)
    out[0::2] = times
    out[1::2] = mids
    return out


# -- propagators -------------------------------------------------------------


def propagate(evaluator: SphericalEvaluator, spectrum: Spectrum, phase: Phase, t: float,
              grid: RadialGrid) -> RadialProfile:
    """u(s, t) = C sum_j phi_j(s) e^(i t psi_j) f^_j |c_j|^-2 w_j; at t = 0 this is :func:`isft` itself."""
    if not np.isfinite(t):
        raise PreconditionError("t must be finite")
    if t == 0:
        return isft(evaluator, spectrum, grid)
    coeff = synthesis_coefficients(evaluator.space, spectrum) * np.exp(1j * t * phase(spectrum.lambdas))
    phi = evaluator.matrix(spectrum.lambdas, grid.radii)
    return RadialProfile(grid, phi.T @ coeff)


def propagate_euclid(n: int, spectrum: Spectrum, a: float, t: float, grid: RadialGrid) -> RadialProfile:
    """Euclidean radial propagator C_n int J(lambda r) e^(i t lambda^a) F f(lambda) lambda^(n-1) dlambda."""
    if not np.isfinite(t):
        raise PreconditionError("t must be finite")
    lam = spectrum.lambdas
    kernel = script_j((n - 2) / 2, np.outer(grid.radii, lam))
    coeff = (euclid_inversion_constant(n) * spectrum.values * np.exp(1j * t * lam ** a)
             * lam ** (n - 1) * spectrum.grid.weights)
    return RadialProfile(grid, kernel @ coeff)


def maximal(evaluator: SphericalEvaluator, spectrum: Spectrum, phase: Phase, t_grid,
            grid: RadialGrid) -> RadialProfile:
    """max over ``t_grid`` of |u(s, t)| at every radius of ``grid``."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0:
        raise ValueError("t_grid is empty")
    _check_times(t_grid, "t_grid")
    coeff = synthesis_coefficients(evaluator.space, spectrum)
    psi = phase(spectrum.lambdas)
    phi = evaluator.matrix(spectrum.lambdas, grid.radii)
    weighted = phi * coeff[:, None]  # (lambda, s)
    best = np.zeros(len(grid))
    for start in range(0, t_grid.size, _T_CHUNK):
        ts = t_grid[start:start + _T_CHUNK]
        u = np.exp(1j * np.outer(ts, psi)) @ weighted
        best = np.maximum(best, np.abs(u).max(axis=0))
    return RadialProfile(grid, best)


def ball_norm(space, profile: RadialProfile, R: float = np.inf) -> float:
    """L^2 norm of a radial profile over the ball of radius R (nodes with s <= R)."""
    s = profile.grid.radii
    mask = s <= R
    w = profile.grid.weights[mask] * density(space, s[mask])
    return float(np.sqrt(np.sum(np.abs(profile.values[mask]) ** 2 * w)))


@dataclass(frozen=True)
class RefinementTrace:
    t_counts: tuple
    norms: tuple
    converged: bool


def maximal_with_refinement(evaluator: SphericalEvaluator, spectrum: Spectrum, phase: Phase,
                            grid: RadialGrid, R: float = 1.0, t_grid=None, rtol: float = 0.005,
                            max_doublings: int = 4):
    """Refine the t grid by doubling until the L^2(B_R) norm of the maximal function changes by < ``rtol``.

    Returns the last maximal profile and a :class:`RefinementTrace` of the
    norms, which is non-decreasing because each grid contains the previous one.
    """
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    profile = maximal(evaluator, spectrum, phase, t_grid, grid)
    counts, norms = [t_grid.size], [ball_norm(evaluator.space, profile, R)]
    converged = False
    for _ in range(max_doublings):
        t_grid = refine_t_grid(t_grid)
        profile = maximal(evaluator, spectrum, phase, t_grid, grid)
        counts.append(t_grid.size)
        norms.append(ball_norm(evaluator.space, profile, R))
        if abs(norms[-1] - norms[-2]) <= rtol * max(norms[-2], 1e-300):
            converged = True
            break
    return profile, RefinementTrace(tuple(counts), tuple(norms), converged)


def linearized(evaluator: SphericalEvaluator, spectrum: Spectrum, phase: Phase, t_of_s: TimeChoice,
               grid: RadialGrid) -> RadialProfile:
    """Propagator evaluated at the radius-dependent time t(s)."""
    times = t_of_s.at(grid.radii)
    coeff = synthesis_coefficients(evaluator.space, spectrum)
    phi = evaluator.matrix(spectrum.lambdas, grid.radii)  # (lambda, s)
    psi = phase(spectrum.lambdas)
    values = np.einsum("js,sj->s", phi * coeff[:, None], np.exp(1j * np.outer(times, psi)))
    return RadialProfile(grid, values)
