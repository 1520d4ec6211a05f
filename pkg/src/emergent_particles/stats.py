"""Occupation counting for FD/BE/MB statistics and region-detection tables.

Detection outcomes for two particles and regions R_1..R_r are count vectors
``(n_1, ..., n_r)``; particles found in none of the regions are not counted,
so an outcome may sum to less than two.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolation, DimensionError, InfeasibleError
from .grid import Grid, WaveFunction
from .manybody import NPartyState

STATISTICS = ("FD", "BE", "MB")


@dataclass(frozen=True)
class OccupationTable:
    n_particles: int
    n_modes: int
    statistics: str
    entries: dict

    def marginal(self, mode: int) -> dict:
        out: dict = {}
        for occ, p in self.entries.items():
            out[occ[mode]] = out.get(occ[mode], 0.0) + p
        return dict(sorted(out.items()))


def _compositions(n: int, k: int):
    """All occupation vectors of n particles over k modes, lexicographic descending."""
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def occupation_distribution(n_particles: int, n_modes: int, statistics: str) -> OccupationTable:
    """A-priori occupation probabilities by exhaustive enumeration.

    FD and BE weight every allowed occupation vector equally; MB weights
    each vector by the number of distinguishable assignments producing it.
    """
    if statistics not in STATISTICS:
        raise ConfigurationError(f"statistics must be one of {STATISTICS}, got {statistics!r}")
    if not (1 <= n_particles <= 6 and 1 <= n_modes <= 8):
        raise ConfigurationError("enumeration limited to n_particles <= 6, n_modes <= 8")
    if statistics == "FD" and n_particles > n_modes:
        raise InfeasibleError(
            f"{n_particles} fermions cannot occupy {n_modes} modes at most singly")

    states = list(_compositions(n_particles, n_modes))
    if statistics == "FD":
        states = [s for s in states if max(s) <= 1]
        weights = [1.0] * len(states)
    elif statistics == "BE":
        weights = [1.0] * len(states)
    else:
        weights = [math.factorial(n_particles) / math.prod(math.factorial(c) for c in s)
                   for s in states]
    total = math.fsum(weights)
    return OccupationTable(n_particles, n_modes, statistics,
                           {s: w / total for s, w in zip(states, weights)})


def _check_regions(regions) -> list[tuple[float, float]]:
    regions = [(float(lo), float(hi)) for lo, hi in regions]
    for lo, hi in regions:
        if not hi > lo:
            raise ConfigurationError(f"empty region [{lo}, {hi})")
    for (a0, a1), (b0, b1) in itertools.combinations(regions, 2):
        if max(a0, b0) < min(a1, b1):
            raise ContractViolation("disjoint-regions", f"regions {(a0, a1)} and {(b0, b1)} overlap")
    return regions


def _labels(grid: Grid, regions, spin_dim: int) -> np.ndarray:
    """Region id per single-particle basis index; len(regions) marks 'nowhere'."""
    lab = np.full(grid.n_points, len(regions))
    for i, (lo, hi) in enumerate(regions):
        lab[grid.mask(lo, hi)] = i
    return np.repeat(lab, spin_dim)


def _outcome_table(block, n_regions: int) -> dict:
    """Fold slot-resolved block probabilities into count-vector outcomes."""
    table: dict = {}
    for j1, j2 in itertools.product(range(n_regions + 1), repeat=2):
        counts = [0] * n_regions
        for j in (j1, j2):
            if j < n_regions:
                counts[j] += 1
        key = tuple(counts)
        table[key] = table.get(key, 0.0) + float(block[j1, j2])
    return dict(sorted(table.items(), reverse=True))


def joint_detection(state: NPartyState, regions) -> dict:
    """Probability of each detector-count outcome for a two-party grid state."""
    if state.n_parties != 2 or state.grid is None:
        raise DimensionError("joint detection needs a two-party state on a grid")
    regions = _check_regions(regions)
    lab = _labels(state.grid, regions, state.spin_dim)
    r = len(regions)
    prob = np.abs(state.coefficients) ** 2
    block = np.zeros((r + 1, r + 1))
    for j1 in range(r + 1):
        rows = prob[lab == j1]
        for j2 in range(r + 1):
            block[j1, j2] = rows[:, lab == j2].sum()
    return _outcome_table(block, r)


def boltzmann_reference(phi: WaveFunction, psi: WaveFunction, regions) -> dict:
    """Distinguishable-particle product-rule table for independent packets."""
    if phi.grid != psi.grid or phi.spin_dim != psi.spin_dim:
        raise DimensionError("phi and psi must share grid and spin_dim")
    regions = _check_regions(regions)
    lab = _labels(phi.grid, regions, phi.spin_dim)
    r = len(regions)
    q_phi = np.array([np.sum(np.abs(phi.vector[lab == j]) ** 2) for j in range(r + 1)])
    q_psi = np.array([np.sum(np.abs(psi.vector[lab == j]) ** 2) for j in range(r + 1)])
    return _outcome_table(np.outer(q_phi, q_psi), r)


def table_distance(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def outcome_label(outcome: tuple) -> str:
    return "(" + ",".join(str(c) for c in outcome) + ")"
