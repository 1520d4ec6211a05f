"""Symmetrized classical states: all index permutations of one phase point.

A phase point is a tuple of n one-particle states ``(x_i, p_i)``; slot ``i``
is the index. Points are kept as plain float tuples so set membership uses
exact equality, and every slot of every point is integrated with the same
elementwise arithmetic, which makes evolution commute with permutation
bit for bit.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .dynamics import PotentialSpec, leapfrog
from .errors import ConfigurationError, ContractViolation

MAX_N = 6

PhasePoint = tuple  # tuple[tuple[float, float], ...]


def phase_point(coords) -> PhasePoint:
    pt = tuple((float(x), float(p)) for x, p in coords)
    if not all(np.isfinite(v) for pair in pt for v in pair):
        raise ConfigurationError("phase point coordinates must be finite")
    return pt


def permute_point(point: PhasePoint, perm) -> PhasePoint:
    return tuple(point[i] for i in perm)


@dataclass(frozen=True)
class ClassicalEnsemble:
    n: int
    points: frozenset

    def sorted_points(self) -> list[PhasePoint]:
        return sorted(self.points)

    def is_permutation_closed(self) -> bool:
        return all(permute_point(pt, perm) in self.points
                   for pt in self.points
                   for perm in itertools.permutations(range(self.n)))


def permuted_ensemble(seed) -> ClassicalEnsemble:
    seed = phase_point(seed)
    n = len(seed)
    if not 1 <= n <= MAX_N:
        raise ConfigurationError(f"ensemble size limited to 1..{MAX_N} particles, got {n}")
    pts = frozenset(permute_point(seed, perm) for perm in itertools.permutations(range(n)))
    return ClassicalEnsemble(n, pts)


def evolve_ensemble(ens: ClassicalEnsemble, pot: PotentialSpec, dt: float,
                    steps: int) -> ClassicalEnsemble:
    """Integrate every slot of every point with the same leapfrog arithmetic."""
    pts = ens.sorted_points()
    arr = np.array(pts, dtype=float)  # (n_points, n, 2)
    x, p = leapfrog(arr[..., 0], arr[..., 1], pot, dt, steps)
    new = frozenset(tuple((float(a), float(b)) for a, b in zip(xr, pr)) for xr, pr in zip(x, p))
    return ClassicalEnsemble(ens.n, new)


def index_marginal(ens: ClassicalEnsemble, i: int) -> frozenset:
    """All one-particle states carried by slot ``i`` across the ensemble."""
    if not 0 <= i < ens.n:
        raise IndexError(f"index {i} outside 0..{ens.n - 1}")
    return frozenset(pt[i] for pt in ens.points)


def occupied_states(ens: ClassicalEnsemble, member: PhasePoint | None = None) -> tuple:
    """Index-free content: the sorted multiset of one-particle states.

    Read from ``member`` (default: the first point in canonical order); every
    member of a permutation-closed ensemble gives the same multiset.
    """
    pts = ens.sorted_points()
    ref = Counter(pts[0] if member is None else member)
    for pt in pts:
        if Counter(pt) != ref:
            raise ContractViolation("occupied-states", "ensemble members disagree on occupied states")
    return tuple(sorted(ref.elements()))
