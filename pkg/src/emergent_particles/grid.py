"""Uniform periodic 1D grids, wave packets and localization metrics.

Units are natural (hbar = 1). Wave functions are stored with continuum
normalization, ``sum(|psi|**2) * dx == 1``. Spinful wave functions keep the
spin index fastest: amplitude ``k * spin_dim + s`` belongs to grid point ``k``
and spin component ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError, DimensionError

NORM_TOL = 1e-10
LEAK_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def index_of(self, x: float) -> int:
        return int(np.clip(np.rint((x - self.x_min) / self.dx), 0, self.n_points - 1))

    def mask(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of grid points in the half-open interval [lo, hi)."""
        x = self.x
        return (x >= lo) & (x < hi)


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    if not np.isfinite(x_min) or not np.isfinite(x_max) or x_max <= x_min:
        raise ConfigurationError(f"degenerate interval [{x_min}, {x_max}]")
    n = int(n_points)
    if n != n_points or n < 8 or n & (n - 1):
        raise ConfigurationError(f"n_points must be a power of two >= 8, got {n_points}")
    return Grid(float(x_min), float(x_max), n)


@dataclass(frozen=True)
class PacketParams:
    x0: float = 0.0
    p0: float = 0.0
    sigma: float = 1.0


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: Grid
    amplitudes: np.ndarray
    spin_dim: int = 1

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.spin_dim not in (1, 2):
            raise ConfigurationError(f"spin_dim must be 1 or 2, got {self.spin_dim}")
        if amps.shape != (self.grid.n_points * self.spin_dim,):
            raise DimensionError(
                f"expected {self.grid.n_points * self.spin_dim} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, grid: Grid, vector, spin_dim: int = 1, normalize: bool = True):
        """Build from an l2 vector (discrete orthonormal-basis coefficients)."""
        v = np.asarray(vector, dtype=complex)
        if normalize:
            nrm = np.linalg.norm(v)
            if nrm == 0:
                raise ConfigurationError("cannot normalize a zero vector")
            v = v / nrm
        return cls(grid, v / np.sqrt(grid.dx), spin_dim)

    @property
    def vector(self) -> np.ndarray:
        """Coefficients in the orthonormal grid basis (l2-normalized)."""
        return self.amplitudes * np.sqrt(self.grid.dx)

    @property
    def dim(self) -> int:
        return self.grid.n_points * self.spin_dim

    @property
    def spinor_field(self) -> np.ndarray:
        return self.amplitudes.reshape(self.grid.n_points, self.spin_dim)

    @property
    def density(self) -> np.ndarray:
        """Position probability density, summed over spin."""
        return np.sum(np.abs(self.spinor_field) ** 2, axis=1)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.density) * self.grid.dx))

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.amplitudes / self.norm, self.spin_dim)

    def with_spin(self, spinor) -> "WaveFunction":
        if self.spin_dim != 1:
            raise DimensionError("wave function already carries spin")
        s = np.asarray(spinor, dtype=complex)
        s = s / np.linalg.norm(s)
        return WaveFunction(self.grid, np.kron(self.amplitudes, s), 2)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        _check_compatible(self, other)
        return WaveFunction(self.grid, self.amplitudes + other.amplitudes, self.spin_dim)

    def __mul__(self, c) -> "WaveFunction":
        return WaveFunction(self.grid, c * self.amplitudes, self.spin_dim)

    __rmul__ = __mul__


def _check_compatible(a: WaveFunction, b: WaveFunction) -> None:
    if a.grid != b.grid:
        raise DimensionError("wave functions live on different grids")
    if a.spin_dim != b.spin_dim:
        raise DimensionError(f"spin_dim mismatch: {a.spin_dim} vs {b.spin_dim}")


def gaussian_packet(grid: Grid, params: PacketParams) -> WaveFunction:
    """Gaussian exp(-(x-x0)^2/(4 sigma^2) + i p0 x), normalized on the grid.

    ``sigma`` is the position standard deviation of ``|psi|**2``.
    """
    x0, p0, sigma = float(params.x0), float(params.p0), float(params.sigma)
    if sigma < 4.0 * grid.dx:
        raise ConfigurationError(
            f"sigma={sigma} is below 4*dx={4 * grid.dx}; packet not resolvable")
    outside = ndtr((grid.x_min - x0) / sigma) + ndtr((x0 - grid.x_max) / sigma)
    if outside > LEAK_TOL:
        raise ConfigurationError(
            f"packet at x0={x0}, sigma={sigma} leaks {outside:.3g} of its mass off the grid")
    if abs(p0) + 3.0 / sigma > np.pi / grid.dx:
        raise ConfigurationError(f"momentum p0={p0} not resolvable at dx={grid.dx}")
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2) + 1j * p0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    return WaveFunction(grid, psi)


def superpose(states, coefficients=None) -> WaveFunction:
    """Normalized linear combination of compatible wave functions."""
    states = list(states)
    if coefficients is None:
        coefficients = np.ones(len(states))
    out = coefficients[0] * states[0]
    for c, s in zip(coefficients[1:], states[1:]):
        out = out + c * s
    return out.normalized()


def inner(a: WaveFunction, b: WaveFunction) -> complex:
    _check_compatible(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dx)


def moments(wf: WaveFunction) -> tuple[float, float, float, float]:
    """Return (mean_x, mean_p, var_x, var_p); momentum moments are spectral."""
    grid = wf.grid
    rho = wf.density
    w = rho / rho.sum()
    x = grid.x
    mean_x = float(np.dot(w, x))
    var_x = float(np.dot(w, (x - mean_x) ** 2))

    phi = np.fft.fft(wf.spinor_field, axis=0)
    pk = np.sum(np.abs(phi) ** 2, axis=1)
    pk = pk / pk.sum()
    k = grid.k
    mean_p = float(np.dot(pk, k))
    var_p = float(np.dot(pk, (k - mean_p) ** 2))
    return mean_x, mean_p, var_x, var_p


def overlap_measure(a: WaveFunction, b: WaveFunction) -> float:
    """Spatial support overlap sum(|a| |b|) dx, in [0, 1]."""
    _check_compatible(a, b)
    return float(np.sum(np.sqrt(a.density * b.density)) * a.grid.dx)


def localization_interval(wf: WaveFunction, delta: float) -> tuple[float, float]:
    """Smallest run of grid cells holding at least 1 - delta of the mass.

    Returns (length, center). Each grid point represents one cell of width dx.
    """
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
    grid = wf.grid
    mass = wf.density * grid.dx
    cum = np.concatenate(([0.0], np.cumsum(mass)))
    target = (1.0 - delta) * cum[-1]
    # for every start i, the first end j with cum[j] - cum[i] >= target
    ends = np.searchsorted(cum, cum[:-1] + target, side="left")
    valid = ends <= grid.n_points
    starts = np.arange(grid.n_points)[valid]
    ends = ends[valid]
    widths = ends - starts
    # among the shortest runs, keep the one holding the most mass
    shortest = np.nonzero(widths == widths.min())[0]
    best = int(shortest[np.argmax(cum[ends[shortest]] - cum[starts[shortest]])])
    i, j = int(starts[best]), int(ends[best])
    length = (j - i) * grid.dx
    x = grid.x
    center = 0.5 * (x[i] + x[j - 1])
    return float(length), float(center)
