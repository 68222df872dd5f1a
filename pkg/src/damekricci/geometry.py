"""Structural parameters of a Damek-Ricci space and its radial volume density."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, PreconditionError

__all__ = ["SpaceParams", "density", "density_log_derivative", "H3"]


@dataclass(frozen=True)
class SpaceParams:
    """Dimensions ``m_v`` (of v) and ``m_z`` (of the centre z) of the H-type algebra.

    ``m_v = 0`` is the degenerate real hyperbolic case, for which the space is
    the hyperbolic space of dimension ``m_z + 1``.

    ``inversion_constant`` is the spectral inversion constant once it has
    been calibrated (see :func:`damekricci.spectral.calibrate`); it is
    ``None`` on a fresh instance.
    """

    m_v: int
    m_z: int
    inversion_constant: Optional[float] = None

    def __post_init__(self):
        for name in ("m_v", "m_z"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise PreconditionError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.m_v < 0 or self.m_v % 2:
            raise PreconditionError(f"m_v must be a non-negative even integer, got {self.m_v}")
        if self.m_z < 1:
            raise PreconditionError(f"m_z must be a positive integer, got {self.m_z}")
        if self.inversion_constant is not None and not self.inversion_constant > 0:
            raise PreconditionError("inversion_constant must be positive")

    @property
    def n(self) -> int:
        """Manifold dimension ``m_v + m_z + 1``."""
        return self.m_v + self.m_z + 1

    @property
    def Q(self) -> float:
        """Homogeneous dimension ``m_v/2 + m_z``."""
        return self.m_v / 2 + self.m_z

    @property
    def rho(self) -> float:
        return self.Q / 2

    @property
    def bessel_order(self) -> float:
        """Order ``(n-2)/2`` of the Bessel kernel attached to the space."""
        return (self.n - 2) / 2

    @property
    def calibrated(self) -> bool:
        return self.inversion_constant is not None

    @property
    def geometry(self) -> tuple:
        return (self.m_v, self.m_z)

    def with_inversion_constant(self, value: float) -> "SpaceParams":
        return dataclasses.replace(self, inversion_constant=float(value))

    def __str__(self):
        return f"S(m_v={self.m_v}, m_z={self.m_z})"


H3 = SpaceParams(0, 2)


def _as_positive_radius(s):
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise DomainError("density is defined for finite s > 0")
    return s


def density(space: SpaceParams, s):
    """Radial volume density A(s) = 2^(m_v+m_z) sinh(s/2)^(m_v+m_z) cosh(s/2)^m_z.

    Accepts scalars or arrays; ``A(s) / s**(n-1) -> 1`` as ``s -> 0``.
    """
    s = _as_positive_radius(s)
    k = space.m_v + space.m_z
    # product of powers keeps the small-s behaviour free of underflow
    out = (2.0 * np.sinh(s / 2)) ** k * np.cosh(s / 2) ** space.m_z
    return out if out.ndim else float(out)


def density_log_derivative(space: SpaceParams, s):
    """A'(s)/A(s) = (m_v+m_z)/2 coth(s/2) + m_z/2 tanh(s/2)."""
    s = _as_positive_radius(s)
    k = space.m_v + space.m_z
    out = 0.5 * k / np.tanh(s / 2) + 0.5 * space.m_z * np.tanh(s / 2)
    return out if out.ndim else float(out)
