"""Radial spectral analysis on a Damek-Ricci space.

Grids are composite Gauss-Legendre rules.  A profile f(s) on a radius grid
and a spectrum f^(lambda) on a frequency grid are linked by

    f^(lambda) = int f(s) phi_lambda(s) A(s) ds
    f(s)       = C int f^(lambda) phi_lambda(s) |c(lambda)|^-2 dlambda

where the inversion constant C is obtained numerically by :func:`calibrate`.
The Euclidean radial transform with the Bessel kernel lives here as well,
since it is the model the spherical transform is compared against.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .cfunction import c_function, plancherel_density
from .errors import CalibrationError, DomainError, PreconditionError
from .geometry import SpaceParams, density
from .specfun import script_j
from .spherical import SphericalEvaluator

__all__ = [
    "gauss_legendre_panels",
    "SpectralGrid",
    "RadialGrid",
    "Spectrum",
    "RadialProfile",
    "SobolevKind",
    "c_function",
    "plancherel_density",
    "sft",
    "isft",
    "synthesis_coefficients",
    "calibrate",
    "reference_bump",
    "sobolev_norm",
    "schwartz_multiplier",
    "euclid_radial_ft",
    "euclid_radial_ift",
    "euclid_inversion_constant",
    "euclid_sobolev_norm",
    "write_csv",
    "read_csv",
]

DEFAULT_ORDER = 16


def gauss_legendre_panels(edges, order: int = DEFAULT_ORDER):
    """Nodes and weights of a composite Gauss-Legendre rule on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly ascending with at least two entries")
    x, w = leggauss(order)
    width = np.diff(edges)[:, None]
    nodes = (edges[:-1, None] + width * (x + 1) / 2).ravel()
    weights = (width * w / 2).ravel()
    return nodes, weights


def _panel_count(length, frequency, nodes_per_period, order):
    per_unit = nodes_per_period * frequency / (2 * math.pi)
    return max(1, math.ceil(length * per_unit / order))


def _check_nodes(nodes, weights, name):
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
        raise ValueError(f"{name} nodes and weights must be matching non-empty 1-D arrays")
    if np.any(nodes <= 0) or np.any(np.diff(nodes) <= 0):
        raise ValueError(f"{name} nodes must be positive and strictly ascending")
    if np.any(weights <= 0):
        raise ValueError(f"{name} weights must be positive")
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Quadrature nodes for dlambda on (lambda_min, lambda_max)."""

    lambdas: np.ndarray
    weights: np.ndarray
    lambda_max: float
    lambda_min: float = 0.0

    def __post_init__(self):
        lam, w = _check_nodes(self.lambdas, self.weights, "spectral")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)
        if lam[-1] > self.lambda_max or lam[0] < self.lambda_min:
            raise ValueError("nodes must lie inside [lambda_min, lambda_max]")

    def __len__(self):
        return self.lambdas.size

    @classmethod
    def from_edges(cls, edges, order: int = DEFAULT_ORDER) -> "SpectralGrid":
        nodes, weights = gauss_legendre_panels(edges, order)
        return cls(nodes, weights, float(edges[-1]), float(edges[0]))

    @classmethod
    def uniform_panels(cls, lo, hi, panels, order: int = DEFAULT_ORDER) -> "SpectralGrid":
        return cls.from_edges(np.linspace(lo, hi, panels + 1), order)

    @classmethod
    def for_radius(cls, lambda_max, s_max, lambda_min=0.0, nodes_per_period=8,
                   order: int = DEFAULT_ORDER) -> "SpectralGrid":
        """Panels fine enough for phi_lambda(s), s <= s_max, which oscillates in lambda with period 2 pi / s."""
        panels = _panel_count(lambda_max - lambda_min, max(s_max, 1.0), nodes_per_period, order)
        return cls.uniform_panels(lambda_min, lambda_max, panels, order)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature nodes for ds on (s_min, s_max)."""

    radii: np.ndarray
    weights: np.ndarray
    s_max: float
    s_min: float = 0.0

    def __post_init__(self):
        s, w = _check_nodes(self.radii, self.weights, "radial")
        object.__setattr__(self, "radii", s)
        object.__setattr__(self, "weights", w)
        if s[-1] > self.s_max or s[0] < self.s_min:
            raise ValueError("nodes must lie inside [s_min, s_max]")

    def __len__(self):
        return self.radii.size

    @classmethod
    def from_edges(cls, edges, order: int = DEFAULT_ORDER) -> "RadialGrid":
        nodes, weights = gauss_legendre_panels(edges, order)
        return cls(nodes, weights, float(edges[-1]), float(edges[0]))

    @classmethod
    def uniform_panels(cls, lo, hi, panels, order: int = DEFAULT_ORDER) -> "RadialGrid":
        return cls.from_edges(np.linspace(lo, hi, panels + 1), order)

    @classmethod
    def for_frequency(cls, s_max, lambda_max, s_min=0.0, nodes_per_period=8,
                      order: int = DEFAULT_ORDER) -> "RadialGrid":
        panels = _panel_count(s_max - s_min, max(lambda_max, 1.0), nodes_per_period, order)
        return cls.uniform_panels(s_min, s_max, panels, order)


def _finite_complex(values, size, what):
    values = np.asarray(values, dtype=complex)
    if values.shape != (size,):
        raise ValueError(f"{what} needs one value per node ({size}), got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise DomainError(f"{what} contains non-finite values")
    return values


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sampled f^(lambda) for lambda > 0 (the even extension is implicit)."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _finite_complex(self.values, len(self.grid), "Spectrum"))

    @property
    def lambdas(self):
        return self.grid.lambdas

    def with_values(self, values) -> "Spectrum":
        return Spectrum(self.grid, values)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Sampled radial function f(s)."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _finite_complex(self.values, len(self.grid), "RadialProfile"))

    @property
    def radii(self):
        return self.grid.radii

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialProfile":
        return cls(grid, fn(grid.radii))

    def l2_norm(self, space: SpaceParams) -> float:
        """(int |f|^2 A(s) ds)^(1/2) over the grid."""
        w = self.grid.weights * density(space, self.grid.radii)
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * w)))


@dataclass(frozen=True)
class SobolevKind:
    """Which radial Sobolev norm: weight (lambda^2 + Q^2/4)^beta or lambda^(2 beta)."""

    kind: str = "inhomogeneous"
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("inhomogeneous", "homogeneous"):
            raise PreconditionError(f"unknown Sobolev kind {self.kind!r}")
        if not self.beta >= 0:
            raise PreconditionError("beta must be >= 0")


# -- spherical transform ------------------------------------------------------


def sft(evaluator: SphericalEvaluator, profile: RadialProfile, grid: SpectralGrid) -> Spectrum:
    """Spherical Fourier transform by quadrature on the profile's radius grid.

    The profile must have decayed by ``s_max``; the truncated integral is
    what gets computed.
    """
    space = evaluator.space
    s = profile.grid.radii
    phi = evaluator.matrix(grid.lambdas, s)
    weighted = profile.values * density(space, s) * profile.grid.weights
    return Spectrum(grid, phi @ weighted)


def _require_constant(space: SpaceParams) -> float:
    if space.inversion_constant is None:
        raise CalibrationError(f"{space} has no inversion constant; run damekricci.spectral.calibrate first")
    return space.inversion_constant


def synthesis_coefficients(space: SpaceParams, spectrum: Spectrum) -> np.ndarray:
    """C f^(lambda_j) |c(lambda_j)|^-2 w_j, the weights every synthesis sum uses."""
    grid = spectrum.grid
    return _require_constant(space) * spectrum.values * plancherel_density(space, grid.lambdas) * grid.weights


def isft(evaluator: SphericalEvaluator, spectrum: Spectrum, grid: RadialGrid) -> RadialProfile:
    """Inverse spherical transform onto the nodes of ``grid``."""
    coeff = synthesis_coefficients(evaluator.space, spectrum)
    phi = evaluator.matrix(spectrum.grid.lambdas, grid.radii)
    return RadialProfile(grid, phi.T @ coeff)


def reference_bump(s):
    """Gaussian exp(-s^2), the profile used to calibrate inversion constants."""
    return np.exp(-np.asarray(s, dtype=float) ** 2)


def calibrate(evaluator: SphericalEvaluator, profile_fn=reference_bump, s_max: float = 8.0,
              lambda_max: float = 16.0) -> SphericalEvaluator:
    """Fix the inversion constant by matching the two Plancherel quadratic forms.

    Returns an evaluator (sharing the phi cache) whose space carries the
    constant.  ``profile_fn`` must be negligible beyond ``s_max`` and its
    transform beyond ``lambda_max``.
    """
    space = evaluator.space
    rgrid = RadialGrid.for_frequency(s_max, lambda_max)
    sgrid = SpectralGrid.for_radius(lambda_max, s_max)
    profile = RadialProfile.from_function(rgrid, profile_fn)
    spectrum = sft(evaluator, profile, sgrid)
    spatial = profile.l2_norm(space) ** 2
    spectral = sobolev_norm(space, spectrum, SobolevKind("homogeneous", 0.0)) ** 2
    return evaluator.with_space(space.with_inversion_constant(spatial / spectral))


def sobolev_norm(space: SpaceParams, spectrum: Spectrum, kind: SobolevKind = SobolevKind()) -> float:
    """(int weight(lambda) |f^|^2 |c|^-2 dlambda)^(1/2); the inversion constant is not included."""
    lam = spectrum.grid.lambdas
    if kind.kind == "inhomogeneous":
        weight = (lam ** 2 + space.Q ** 2 / 4) ** kind.beta
    else:
        weight = lam ** (2 * kind.beta)
    integrand = weight * np.abs(spectrum.values) ** 2 * plancherel_density(space, lam)
    return float(np.sqrt(np.sum(integrand * spectrum.grid.weights)))


def schwartz_multiplier(space: SpaceParams, spectrum: Spectrum, direction: str = "forward",
                        lambda_min: Optional[float] = None) -> Spectrum:
    """Pointwise map kappa -> |c|^-2 / lambda^(n-1) kappa ('forward') or its reciprocal ('inverse').

    The forward map is only meaningful for spectra supported away from the
    origin: values must vanish below ``lambda_min`` when it is given, and at
    the lowest grid node otherwise.
    """
    lam = spectrum.grid.lambdas
    if direction == "forward":
        if lambda_min is not None:
            if lambda_min <= 0 or np.any(spectrum.values[lam < lambda_min] != 0):
                raise PreconditionError("forward multiplier needs spectral support inside [lambda_min, inf)")
        elif spectrum.values[0] != 0:
            raise PreconditionError("forward multiplier needs a spectrum vanishing near lambda = 0")
    elif direction != "inverse":
        raise ValueError("direction must be 'forward' or 'inverse'")
    factor = plancherel_density(space, lam) / lam ** (space.n - 1)
    if direction == "forward":
        return spectrum.with_values(spectrum.values * factor)
    return spectrum.with_values(spectrum.values / factor)


# -- Euclidean radial transform ----------------------------------------------


def _check_dimension(n):
    if int(n) != n or n < 2:
        raise PreconditionError(f"dimension must be an integer >= 2, got {n}")
    return int(n)


def euclid_radial_ft(n: int, profile: RadialProfile, grid: SpectralGrid) -> Spectrum:
    """F f(lambda) = int f(r) J(lambda r) r^(n-1) dr with the kernel J normalized to J(0) = 1."""
    n = _check_dimension(n)
    r = profile.grid.radii
    kernel = script_j((n - 2) / 2, np.outer(grid.lambdas, r))
    return Spectrum(grid, kernel @ (profile.values * r ** (n - 1) * profile.grid.weights))


def euclid_inversion_constant(n: int) -> float:
    """C_n with f(r) = C_n int F f(lambda) J(lambda r) lambda^(n-1) dlambda, i.e. 1/(2^(n-2) Gamma(n/2)^2)."""
    n = _check_dimension(n)
    return math.exp(-(n - 2) * math.log(2) - 2 * math.lgamma(n / 2))


def euclid_radial_ift(n: int, spectrum: Spectrum, grid: RadialGrid) -> RadialProfile:
    n = _check_dimension(n)
    lam = spectrum.grid.lambdas
    kernel = script_j((n - 2) / 2, np.outer(grid.radii, lam))
    coeff = euclid_inversion_constant(n) * spectrum.values * lam ** (n - 1) * spectrum.grid.weights
    return RadialProfile(grid, kernel @ coeff)


def euclid_sobolev_norm(n: int, spectrum: Spectrum, beta: float) -> float:
    """Homogeneous norm (int lambda^(2 beta) |F g|^2 lambda^(n-1) dlambda)^(1/2)."""
    n = _check_dimension(n)
    lam = spectrum.grid.lambdas
    integrand = lam ** (2 * beta + n - 1) * np.abs(spectrum.values) ** 2
    return float(np.sqrt(np.sum(integrand * spectrum.grid.weights)))


# -- CSV serialization --------------------------------------------------------

_CSV_HEADER = ["node", "value_re", "value_im", "weight"]


def write_csv(path, data, config: Optional[dict] = None) -> None:
    """Write a Spectrum or RadialProfile as node,value_re,value_im,weight rows.

    Two comment lines precede the header: the grid description needed to
    read the file back and, optionally, the run configuration as JSON.
    """
    if isinstance(data, Spectrum):
        nodes, weights = data.grid.lambdas, data.grid.weights
        meta = {"kind": "spectrum", "lo": data.grid.lambda_min, "hi": data.grid.lambda_max}
    elif isinstance(data, RadialProfile):
        nodes, weights = data.grid.radii, data.grid.weights
        meta = {"kind": "profile", "lo": data.grid.s_min, "hi": data.grid.s_max}
    else:
        raise TypeError("write_csv expects a Spectrum or a RadialProfile")
    with open(path, "w", newline="") as fh:
        fh.write("# grid: " + json.dumps(meta, sort_keys=True) + "\n")
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for row in zip(nodes, data.values.real, data.values.imag, weights):
            writer.writerow(["%.17g" % v for v in row])


def read_csv(path):
    """Inverse of :func:`write_csv`."""
    meta = None
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("# grid: "):
                meta = json.loads(line[len("# grid: "):])
            elif not line.startswith("#"):
                rows.append(line)
    if meta is None:
        raise ValueError(f"{path}: missing '# grid:' line")
    reader = csv.reader(rows)
    if next(reader) != _CSV_HEADER:
        raise ValueError(f"{path}: unexpected header")
    table = np.array([[float(v) for v in row] for row in reader if row])
    nodes, values, weights = table[:, 0], table[:, 1] + 1j * table[:, 2], table[:, 3]
    if meta["kind"] == "spectrum":
        return Spectrum(SpectralGrid(nodes, weights, meta["hi"], meta["lo"]), values)
    return RadialProfile(RadialGrid(nodes, weights, meta["hi"], meta["lo"]), values)
