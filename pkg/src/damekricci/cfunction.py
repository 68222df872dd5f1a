"""Harish-Chandra c-function and the radial Plancherel density."""

from __future__ import annotations

import math

import numpy as np

from .errors import PoleError
from .geometry import SpaceParams
from .specfun import log_gamma_complex

__all__ = ["c_function", "plancherel_density", "log_c_function"]


def log_c_function(space: SpaceParams, lam):
    """log c(lambda) assembled from four log-Gamma terms."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0):
        raise PoleError("c(lambda) has a pole at lambda = 0")
    Q, n, m_v = space.Q, space.n, space.m_v
    il = 1j * lam
    return (
        (Q - 2 * il) * math.log(2)
        + log_gamma_complex(2 * il)
        - log_gamma_complex((Q + 2 * il) / 2)
        + math.lgamma(n / 2)
        - log_gamma_complex((m_v + 4 * il + 2) / 4)
    )


def c_function(space: SpaceParams, lam):
    """c(lambda) = 2^(Q-2i lambda) Gamma(2i lambda) Gamma(n/2) / (Gamma((Q+2i lambda)/2) Gamma((m_v+4i lambda+2)/4)).

    On real hyperbolic 3-space this collapses to ``1/(i lambda)``.
    """
    out = np.exp(log_c_function(space, lam))
    return out if np.ndim(out) else complex(out)


def plancherel_density(space: SpaceParams, lam):
    """|c(lambda)|^-2, extended by 0 at lambda = 0."""
    lam = np.asarray(lam, dtype=float)
    nonzero = lam != 0
    out = np.zeros_like(lam)
    if np.any(nonzero):
        out[nonzero] = np.exp(-2 * log_c_function(space, lam[nonzero]).real)
    return out if out.ndim else float(out)
