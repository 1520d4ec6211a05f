"""Schmidt decompositions and the localized-particle criterion.

A two-party (anti)symmetric state built from orthonormal one-particle states
has a degenerate top pair of Schmidt coefficients, and any unitary mixing of
that pair gives another valid Schmidt decomposition. The criterion searches
this rotation family for a pair of spatially non-overlapping packets. The
family is parametrized as

    a = cos(theta) l0 + exp(i phase) sin(theta) l1
    b = -exp(-i phase) sin(theta) l0 + cos(theta) l1

with theta in [0, pi) and phase in [0, 2 pi). Shifting theta by pi/2 swaps
a and b up to a global phase, so every pair shows up twice on the torus.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, ContractViolation, UnsupportedError
from .grid import Grid, WaveFunction, localization_interval
from .manybody import NPartyState, Symmetry, raw_symmetrized

DEGENERACY_TOL = 1e-8
RANK_TOL = 1e-10
FIDELITY_TOL = 1e-9
DEFAULT_OVERLAP_EPS = 1e-3


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray
    grid: Grid | None = None
    spin_dim: int = 1

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ki,kj->ij", self.coefficients, self.left, self.right)

    def _waves(self, rows) -> list[WaveFunction]:
        if self.grid is None:
            raise ConfigurationError("decomposition has no grid attached")
        return [WaveFunction.from_vector(self.grid, r, self.spin_dim, normalize=False)
                for r in rows]

    @property
    def left_basis(self) -> list[WaveFunction]:
        return self._waves(self.left)

    @property
    def right_basis(self) -> list[WaveFunction]:
        return self._waves(self.right)


def schmidt(state: NPartyState) -> SchmidtDecomposition:
    """Singular value decomposition of the two-party coefficient matrix."""
    if state.n_parties != 2:
        raise UnsupportedError(f"Schmidt decomposition needs 2 parties, got {state.n_parties}")
    u, s, vh = np.linalg.svd(state.coefficients)
    r = max(1, int(np.sum(s > RANK_TOL)))
    return SchmidtDecomposition(s[:r].copy(), u[:, :r].T.copy(), vh[:r, :].copy(),
                                state.grid, state.spin_dim)


def _mixing(theta: float, phase: float) -> np.ndarray:
    c, s, e = np.cos(theta), np.sin(theta), np.exp(1j * phase)
    return np.array([[c, -np.conj(e) * s], [e * s, c]])


def rotate_degenerate(dec: SchmidtDecomposition, theta: float, phase: float) -> SchmidtDecomposition:
    """Mix the degenerate top pair of both bases; the represented state is unchanged."""
    if dec.rank < 2 or abs(dec.coefficients[0] - dec.coefficients[1]) > DEGENERACY_TOL:
        raise ContractViolation("degenerate-schmidt", "top two Schmidt coefficients differ")
    u = _mixing(theta, phase)
    left, right = dec.left.copy(), dec.right.copy()
    left[:2] = u.T @ dec.left[:2]
    right[:2] = u.conj().T @ dec.right[:2]
    return SchmidtDecomposition(dec.coefficients.copy(), left, right, dec.grid, dec.spin_dim)


def _moduli(vectors: np.ndarray, spin_dim: int) -> np.ndarray:
    """Pointwise |v| over grid points (last axis), spin summed."""
    shape = vectors.shape[:-1] + (-1, spin_dim)
    return np.sqrt(np.sum(np.abs(vectors.reshape(shape)) ** 2, axis=-1))


def pair_overlap(l0: np.ndarray, l1: np.ndarray, theta, phase, spin_dim: int = 1) -> np.ndarray:
    """Overlap measure of the rotated pair (a, b), broadcast over theta and phase."""
    theta = np.asarray(theta, dtype=float)[..., None]
    e = np.exp(1j * np.asarray(phase, dtype=float))[..., None]
    c, s = np.cos(theta), np.sin(theta)
    a = c * l0 + e * s * l1
    b = -np.conj(e) * s * l0 + c * l1
    return np.sum(_moduli(a, spin_dim) * _moduli(b, spin_dim), axis=-1)


@dataclass(frozen=True, eq=False)
class OverlapScan:
    thetas: np.ndarray
    phases: np.ndarray
    values: np.ndarray
    l0: np.ndarray
    l1: np.ndarray
    spin_dim: int

    def at(self, theta, phase) -> np.ndarray:
        return pair_overlap(self.l0, self.l1, theta, phase, self.spin_dim)


def overlap_scan(state: NPartyState, scan_resolution: int = 64) -> OverlapScan:
    """Overlap of rotated top Schmidt pairs on a uniform (theta, phase) lattice."""
    if scan_resolution < 16:
        raise ConfigurationError(f"scan_resolution must be >= 16, got {scan_resolution}")
    dec = schmidt(state)
    if dec.rank < 2:
        l0, l1 = dec.left[0], dec.left[0]
    else:
        l0, l1 = dec.left[0], dec.left[1]
    res = 2 * ((int(scan_resolution) + 1) // 2)
    thetas = np.pi * np.arange(res) / res
    phases = 2 * np.pi * np.arange(res) / res
    values = pair_overlap(l0, l1, thetas[:, None], phases[None, :], state.spin_dim)
    return OverlapScan(thetas, phases, values, l0, l1, state.spin_dim)


def _refine(scan: OverlapScan, theta0: float, phase0: float) -> tuple[float, float, float]:
    def f(z):
        return float(scan.at(z[0], z[1]))

    step = np.pi / len(scan.thetas)
    res = minimize(f, [theta0, phase0], method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000,
                            "initial_simplex": [[theta0, phase0], [theta0 + step, phase0],
                                                [theta0, phase0 + 2 * step]]})
    theta, phase = float(res.x[0]) % np.pi, float(res.x[1]) % (2 * np.pi)
    best = f([theta, phase])
    start = f([theta0, phase0])
    if start < best:
        return theta0, phase0, start
    return theta, phase, best


def _local_minima(values: np.ndarray) -> list[tuple[int, int]]:
    """Lattice points no larger than their 8 periodic neighbours."""
    is_min = np.ones(values.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= values <= np.roll(np.roll(values, di, axis=0), dj, axis=1)
    return [tuple(ix) for ix in np.argwhere(is_min)]


def minimum_overlap(state: NPartyState, scan_resolution: int = 64) -> float:
    """Smallest overlap measure reachable by rotating the top Schmidt pair."""
    scan = overlap_scan(state, scan_resolution)
    i, j = np.unravel_index(np.argmin(scan.values), scan.values.shape)
    return _refine(scan, scan.thetas[i], scan.phases[j])[2]


@dataclass(frozen=True, eq=False)
class ParticleDecomposition:
    packets: tuple[WaveFunction, WaveFunction]
    symmetry: Symmetry
    overlap: float
    unique: bool
    fidelity: float
    theta: float
    phase: float
    n_minima: int


def _same_pair(p, q, tol=1e-6) -> bool:
    """True if {p0, p1} equals {q0, q1} up to phases."""
    direct = abs(np.vdot(p[0], q[0]))
    swapped = abs(np.vdot(p[0], q[1]))
    return max(direct, swapped) > 1.0 - tol


def find_particle_decomposition(state: NPartyState, overlap_eps: float = DEFAULT_OVERLAP_EPS,
                                scan_resolution: int = 64) -> ParticleDecomposition | None:
    """Symmetrized product of non-overlapping packets equal to ``state``, or None.

    Every lattice local minimum of the overlap scan is refined by local
    descent; minima at or below ``overlap_eps`` that reconstruct the state are
    collected and identified modulo the swap of the two packets and global
    phases. ``unique`` reports whether exactly one such pair exists.
    """
    if scan_resolution < 16:
        raise ConfigurationError(f"scan_resolution must be >= 16, got {scan_resolution}")
    if not 0.0 < overlap_eps < 1.0:
        raise ConfigurationError(f"overlap_eps must lie in (0, 1), got {overlap_eps}")
    if state.n_parties != 2:
        raise UnsupportedError("particle decomposition is implemented for two parties")
    if state.symmetry is Symmetry.NONE:
        raise UnsupportedError("particle decomposition needs a bosonic or fermionic source")
    if state.grid is None:
        raise ConfigurationError("particle decomposition needs a state on a grid")

    dec = schmidt(state)
    if dec.rank != 2 or abs(dec.coefficients[0] - dec.coefficients[1]) > DEGENERACY_TOL:
        # rank 1 is a doubly occupied packet; anything else is not a
        # symmetrized product of two orthogonal states
        return None

    scan = overlap_scan(state, scan_resolution)
    source = state.coefficients
    found = []
    for i, j in _local_minima(scan.values):
        theta, phase, value = _refine(scan, scan.thetas[i], scan.phases[j])
        if value > overlap_eps:
            continue
        u = _mixing(theta, phase)
        pair = u.T @ np.vstack([scan.l0, scan.l1])
        recon = raw_symmetrized([pair[0], pair[1]], state.symmetry)
        recon = recon / np.linalg.norm(recon)
        fidelity = float(abs(np.vdot(recon, source)) ** 2)
        if fidelity < 1.0 - FIDELITY_TOL:
            continue
        found.append((value, theta, phase, fidelity, pair))

    if not found:
        return None
    distinct = []
    for cand in sorted(found, key=lambda c: c[0]):
        if not any(_same_pair(cand[4], d[4]) for d in distinct):
            distinct.append(cand)
    value, theta, phase, fidelity, pair = distinct[0]
    packets = tuple(WaveFunction.from_vector(state.grid, v, state.spin_dim) for v in pair)
    return ParticleDecomposition(packets, state.symmetry, float(value), len(distinct) == 1,
                                 fidelity, theta, phase, len(distinct))


def localization_score(wf: WaveFunction, narrowness: float, delta: float = 0.01) -> float:
    """99% localization length in units of ``narrowness``; <= 1 means localized."""
    if narrowness <= 0:
        raise ConfigurationError("narrowness must be positive")
    return localization_interval(wf, delta)[0] / narrowness
