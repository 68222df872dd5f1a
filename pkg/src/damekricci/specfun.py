"""Scalar special functions: complex log-Gamma, Bessel J and the normalized Bessel kernel.

All functions broadcast over numpy arrays and are pure.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError, PoleError

__all__ = [
    "log_gamma_complex",
    "bessel_j",
    "bessel_j_asymptotic",
    "script_j",
    "check_bessel_order",
]

# B_2k / (2k (2k-1)) for k = 1..8
_STIRLING = np.array([
    1 / 12,
    -1 / 360,
    1 / 1260,
    -1 / 1680,
    1 / 1188,
    -691 / 360360,
    1 / 156,
    -3617 / 122400,
])
_STIRLING_RADIUS = 15.0
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _stirling(w):
    inv = 1.0 / w
    inv2 = inv * inv
    tail = np.zeros_like(w)
    for coef in _STIRLING[::-1]:
        tail = tail * inv2 + coef
    return (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + tail * inv


def log_gamma_complex(z):
    """Principal branch of log Gamma(z) for complex ``z``.

    Stirling's series is applied once ``Re z >= 15`` (or ``|z| >= 15`` with
    ``Re z >= 0``); smaller arguments are shifted up with the recurrence
    ``log Gamma(z) = log Gamma(z+m) - sum_k log(z+k)``.  Summing principal
    logarithms reproduces the branch that is continuous on the plane cut
    along the non-positive real axis.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(pole):
        raise PoleError(f"log Gamma has a pole at {z[pole][0].real:g}")
    ready = (z.real >= _STIRLING_RADIUS) | ((np.abs(z) >= _STIRLING_RADIUS) & (z.real >= 0))
    shift = np.where(ready, 0, np.ceil(_STIRLING_RADIUS - z.real)).astype(int)
    w = z.copy()
    correction = np.zeros_like(z)
    for k in range(int(shift.max(initial=0))):
        active = shift > k
        correction[active] += np.log(w[active])
        w[active] += 1.0
    out = _stirling(w) - correction
    return out[0] if scalar else out


def check_bessel_order(mu) -> float:
    """Validate that ``mu`` is a non-negative half-integer and return it as float."""
    mu = float(mu)
    if mu < 0 or not math.isclose(2 * mu, round(2 * mu), abs_tol=1e-12):
        raise DomainError(f"Bessel order must lie in {{0, 1/2, 1, ...}}, got {mu}")
    return round(2 * mu) / 2


def bessel_j(mu, x):
    """Bessel function J_mu(x) for half-integer ``mu >= 0`` and ``x >= 0``.

    Order 1/2 uses the closed form sqrt(2/(pi x)) sin x; other orders go
    through ``scipy.special.jv``.
    """
    mu = check_bessel_order(mu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("bessel_j needs x >= 0")
    if mu == 0.5:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(x > 0, np.sqrt(2 / (np.pi * np.where(x > 0, x, 1.0))) * np.sin(x), 0.0)
    else:
        out = special.jv(mu, x)
    return out if out.ndim else float(out)


def bessel_j_asymptotic(mu, x):
    """Leading large-argument term sqrt(2/(pi x)) cos(x - pi mu/2 - pi/4)."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(2 / (np.pi * x)) * np.cos(x - np.pi * mu / 2 - np.pi / 4)


_SERIES_CUTOFF = 1e-3


def script_j(mu, x):
    """Bessel kernel normalized to one at the origin.

    ``script_j(mu, x) = Gamma(mu+1) (2/x)^mu J_mu(x)``, so that
    ``script_j(1/2, x) = sin(x)/x`` and ``script_j(mu, 0) = 1``.  Below
    ``x = 1e-3`` the first three terms of the power series are used.
    """
    mu = check_bessel_order(mu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("script_j needs x >= 0")
    small = x < _SERIES_CUTOFF
    q = x * x / 4
    series = 1 - q / (mu + 1) + q * q / (2 * (mu + 1) * (mu + 2))
    xs = np.where(small, 1.0, x)
    if mu == 0.5:
        direct = np.sin(xs) / xs
    elif mu == 0:
        direct = special.j0(xs)
    else:
        log_pref = special.gammaln(mu + 1) + mu * np.log(2 / xs)
        direct = np.exp(log_pref) * special.jv(mu, xs)
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)
