"""Spherical functions phi_lambda(s) by ODE integration, plus the two series main terms.

The radial eigen-equation

    u'' + (A'/A)(s) u' + (lambda^2 + Q^2/4) u = 0,   u(0) = 1, u'(0) = 0

is integrated for ``w = exp(Q s / 2) u``, which removes the exponential decay
so that absolute and relative tolerances stay meaningful out to large radii.
Integration starts at a small radius from a Frobenius (Taylor) seed.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .cfunction import c_function
from .errors import DomainError, NumericalError, PreconditionError
from .geometry import SpaceParams, density
from .specfun import script_j

__all__ = ["SphericalEvaluator", "phi", "phi_near_main", "phi_far_main", "DEFAULT_R0"]

DEFAULT_R0 = 2.0
_GROUP = 64  # frequencies integrated together; bounded so the RMS error norm stays honest
_CACHE_SIZE = 32


def _check_grid(s_grid):
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1:
        raise ValueError("s_grid must be one-dimensional")
    if np.any(~np.isfinite(s)) or np.any(s < 0):
        raise ValueError("s_grid must hold finite radii >= 0")
    if s.size > 1 and np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be strictly ascending")
    return s


@dataclass(frozen=True)
class SphericalEvaluator:
    """Evaluates phi_lambda on radius grids for one space.

    Results of :meth:`matrix` are memoized, so propagators that reuse the
    same (frequency, radius) grids pay for the ODE solve once.
    """

    space: SpaceParams
    ode_tolerance: float = 1e-10
    taylor_start: float = 1e-4
    regime_radius: float = DEFAULT_R0
    _cache: OrderedDict = field(default_factory=OrderedDict, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.ode_tolerance <= 1e-6:
            raise PreconditionError("ode_tolerance must lie in (0, 1e-6]")
        if not 0 < self.taylor_start <= 1e-2:
            raise PreconditionError("taylor_start must lie in (0, 1e-2]")
        if not self.regime_radius > 0:
            raise PreconditionError("regime_radius must be positive")

    def with_space(self, space: SpaceParams) -> "SphericalEvaluator":
        """Same settings and shared cache for a space with identical geometry."""
        if space.geometry != self.space.geometry:
            raise PreconditionError("with_space only swaps calibration data, not geometry")
        return SphericalEvaluator(space, self.ode_tolerance, self.taylor_start,
                                  self.regime_radius, self._cache)

    def regime(self, s) -> np.ndarray:
        """'near' for s <= R0 (Bessel series regime), 'far' beyond."""
        s = np.asarray(s, dtype=float)
        return np.where(s <= self.regime_radius, "near", "far")

    # -- series seed ---------------------------------------------------------

    def _taylor(self, lam, s):
        """u(s) and u'(s) from u = 1 + u2 s^2 + u4 s^4."""
        sp = self.space
        n = sp.n
        energy = lam ** 2 + sp.Q ** 2 / 4
        # A'/A = (n-1)/s + alpha s + O(s^3)
        alpha = (sp.m_v + sp.m_z) / 12 + sp.m_z / 4
        u2 = -energy / (2 * n)
        u4 = -(2 * alpha + energy) * u2 / (4 * (n + 2))
        s2 = s * s
        u = 1 + u2 * s2 + u4 * s2 * s2
        du = 2 * u2 * s + 4 * u4 * s2 * s
        return u, du

    # -- core solve ----------------------------------------------------------

    def _solve_group(self, lam, s):
        """Integrate the scaled equation for a group of |lambda| on radii s > s0."""
        sp = self.space
        rho = sp.Q / 2
        s0 = self.taylor_start
        m = lam.size
        u0, du0 = self._taylor(lam, s0)
        scale0 = np.exp(rho * s0)
        y0 = np.concatenate([scale0 * u0, scale0 * (du0 + rho * u0)])
        lam2 = lam ** 2
        half_k, half_mz = (sp.m_v + sp.m_z) / 2, sp.m_z / 2
        out = np.empty(2 * m)

        def rhs(r, y):
            th = math.tanh(r / 2)
            p = half_k / th + half_mz * th  # A'/A
            out[:m] = y[m:]
            out[m:] = (2 * rho - p) * y[m:] - (lam2 + 2 * rho * rho - p * rho) * y[:m]
            return out.copy()

        rtol = self.ode_tolerance
        amp = (1 + lam) ** (-(sp.n - 1) / 2)
        atol = np.concatenate([1e-2 * rtol * amp, 1e-2 * rtol * amp * (1 + lam)])
        sol = solve_ivp(rhs, (s0, s[-1]), y0, method="DOP853", t_eval=s, rtol=rtol,
                        atol=atol, max_step=0.1 / (1 + lam.max()))
        if sol.status != 0 or sol.y.shape[1] != s.size:
            failed_at = float(sol.t[-1]) if sol.t.size else s0
            raise NumericalError(f"spherical-function ODE failed at s={failed_at:.6g}: {sol.message}",
                                 s=failed_at)
        return sol.y[:m] * np.exp(-rho * s)[None, :]

    def _compute(self, lam, s):
        absl = np.abs(lam)
        out = np.empty((absl.size, s.size))
        inner = s < self.taylor_start
        if np.any(inner):
            out[:, inner] = self._taylor(absl[:, None], s[None, inner])[0]
        outer = ~inner
        if np.any(outer):
            order = np.argsort(absl, kind="stable")
            for start in range(0, absl.size, _GROUP):
                idx = order[start:start + _GROUP]
                out[np.ix_(idx, outer)] = self._solve_group(absl[idx], s[outer])
        return out

    def matrix(self, lambdas, s_grid) -> np.ndarray:
        """phi_{lambda_j}(s_i) as an array of shape (len(lambdas), len(s_grid))."""
        lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
        if np.any(~np.isfinite(lam)):
            raise ValueError("lambda values must be finite")
        s = _check_grid(s_grid)
        key = (lam.tobytes(), s.tobytes())
        cached = self._cache.get(key)
        if cached is not None:
            self._cache.move_to_end(key)
            return cached
        out = self._compute(lam, s)
        out.setflags(write=False)
        self._cache[key] = out
        while len(self._cache) > _CACHE_SIZE:
            self._cache.popitem(last=False)
        return out

    def phi(self, lam: float, s_grid) -> np.ndarray:
        return self.matrix([lam], s_grid)[0]


def phi(evaluator: SphericalEvaluator, lam: float, s_grid) -> np.ndarray:
    """phi_lambda on an ascending radius grid (even in lambda, equal to 1 at s = 0)."""
    return evaluator.phi(lam, s_grid)


def phi_near_main(space: SpaceParams, lam, s, R0: float = DEFAULT_R0):
    """Leading Bessel-series term (s^(n-1)/A(s))^(1/2) J(lambda s) for 0 < s <= R0.

    The kernel is normalized to 1 at the origin and the series constant is
    fixed by phi_lambda(0) = 1; see the README for how this relates to other
    normalizations of the same term.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(s > R0):
        raise DomainError(f"near-field term needs 0 < s <= {R0}")
    pref = np.sqrt(s ** (space.n - 1) / density(space, s))
    out = pref * script_j(space.bessel_order, np.abs(lam) * s)
    return out if np.ndim(out) else float(out)


def phi_far_main(space: SpaceParams, lam, s, R0: float = DEFAULT_R0, c_fn=c_function):
    """Leading far-field term 2^(-m_z/2) A(s)^(-1/2) 2 Re[c(lambda) e^(i lambda s)] for s > R0."""
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0):
        raise DomainError("far-field term is undefined at lambda = 0")
    if np.any(s <= R0):
        raise DomainError(f"far-field term needs s > {R0}")
    c = c_fn(space, lam)
    out = 2.0 ** (-space.m_z / 2) / np.sqrt(density(space, s)) * 2 * np.real(c * np.exp(1j * lam * s))
    return out if np.ndim(out) else float(out)
