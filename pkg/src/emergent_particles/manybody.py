"""States and observables of two or three identical particles.

An :class:`NPartyState` stores a rank-n coefficient tensor in the orthonormal
grid basis of each factor space (``WaveFunction.vector``), so the plain l2
norm of the tensor is the state norm. Slots are 0-based: ``keep_index=0``
is the first factor space.

Observables come in three storage forms, chosen by the constructor used:
a dense matrix, a sum of tensor-product terms (one single-party factor per
slot, ``None`` meaning identity) or a position-diagonal tensor. Only the
action on a state tensor is needed, so two-party observables on a 256-point
grid never have to be materialized.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (ConfigurationError, ContractViolation, DimensionError,
                     PauliExclusionError, UnsupportedError)
from .grid import Grid, WaveFunction, overlap_measure

MAX_PARTIES = 3
MAX_ELEMENTS = 2**24
MAX_GRID_POINTS = 512
MAX_SINGLE_DIM = 1024
SYM_TOL = 1e-10
PAULI_TOL = 1e-12
OVERLAP_WARN = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SINGLET = np.array([[0, 1], [-1, 0]], dtype=complex) / np.sqrt(2)


class Symmetry(str, Enum):
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"
    NONE = "none"


def permutation_sign(perm) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2)
                     if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def _transposition(n: int, i: int, j: int) -> list[int]:
    axes = list(range(n))
    axes[i], axes[j] = axes[j], axes[i]
    return axes


def symmetry_defect(tensor: np.ndarray, symmetry: Symmetry) -> float:
    """Largest entrywise deviation from the (anti)symmetry under transpositions."""
    symmetry = Symmetry(symmetry)
    if symmetry is Symmetry.NONE:
        return 0.0
    sign = 1.0 if symmetry is Symmetry.BOSONIC else -1.0
    n = tensor.ndim
    worst = 0.0
    for i, j in itertools.combinations(range(n), 2):
        swapped = np.transpose(tensor, _transposition(n, i, j))
        worst = max(worst, float(np.max(np.abs(swapped - sign * tensor))))
    return worst


@dataclass(frozen=True, eq=False)
class NPartyState:
    coefficients: np.ndarray
    symmetry: Symmetry = Symmetry.NONE
    grid: Grid | None = None
    spin_dim: int = 1
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "symmetry", Symmetry(self.symmetry))
        if c.ndim < 2 or len(set(c.shape)) != 1:
            raise DimensionError(f"need a cubic tensor with >= 2 slots, got shape {c.shape}")
        if self.grid is not None and c.shape[0] != self.grid.n_points * self.spin_dim:
            raise DimensionError("tensor dimension does not match grid and spin")
        nrm = np.linalg.norm(c)
        if abs(nrm - 1.0) > 1e-10:
            raise ContractViolation("unit-norm", f"state norm is {nrm}")
        defect = symmetry_defect(c, self.symmetry)
        if defect > SYM_TOL:
            raise ContractViolation(
                "symmetry", f"{self.symmetry.value} state violates exchange symmetry by {defect:.3g}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def n_parties(self) -> int:
        return self.coefficients.ndim

    @property
    def single_particle_dim(self) -> int:
        return self.coefficients.shape[0]

    def permuted(self, perm) -> np.ndarray:
        """Coefficient tensor with its slots permuted."""
        return np.transpose(self.coefficients, perm)


def _vectors(states) -> tuple[list[np.ndarray], WaveFunction]:
    states = list(states)
    if not 2 <= len(states) <= MAX_PARTIES:
        raise UnsupportedError(f"between 2 and {MAX_PARTIES} parties supported, got {len(states)}")
    ref = states[0]
    for s in states[1:]:
        if s.grid != ref.grid or s.spin_dim != ref.spin_dim:
            raise DimensionError("all single-particle states must share grid and spin_dim")
    if ref.grid.n_points > MAX_GRID_POINTS or ref.dim > MAX_SINGLE_DIM:
        raise ConfigurationError(
            f"single-particle space {ref.grid.n_points}x{ref.spin_dim} exceeds the desk-scale cap "
            f"({MAX_GRID_POINTS} grid points, {MAX_SINGLE_DIM} with spin)")
    if ref.dim ** len(states) > MAX_ELEMENTS:
        raise ConfigurationError(
            f"{len(states)} parties of dimension {ref.dim} exceed the dense tensor cap")
    return [s.vector for s in states], ref


def _outer(vectors) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def raw_symmetrized(vectors, symmetry: Symmetry) -> np.ndarray:
    """(1/sqrt(n!)) * sum over permutations (with sign for fermions), unnormalized."""
    symmetry = Symmetry(symmetry)
    n = len(vectors)
    if symmetry is Symmetry.NONE:
        return _outer(vectors)
    total = np.zeros((vectors[0].shape[0],) * n, dtype=complex)
    for perm in itertools.permutations(range(n)):
        sign = permutation_sign(perm) if symmetry is Symmetry.FERMIONIC else 1
        total += sign * _outer([vectors[p] for p in perm])
    return total / math.sqrt(math.factorial(n))


def product_state(states) -> NPartyState:
    vecs, ref = _vectors(states)
    t = _outer(vecs)
    return NPartyState(t / np.linalg.norm(t), Symmetry.NONE, ref.grid, ref.spin_dim)


def symmetrized_product(states, symmetry: Symmetry) -> NPartyState:
    """Normalized (anti)symmetrized tensor product of single-particle states.

    Raises PauliExclusionError when fermionic inputs are linearly dependent.
    """
    symmetry = Symmetry(symmetry)
    vecs, ref = _vectors(states)
    t = raw_symmetrized(vecs, symmetry)
    nrm = float(np.linalg.norm(t))
    if symmetry is Symmetry.FERMIONIC and nrm <= PAULI_TOL:
        raise PauliExclusionError(
            f"antisymmetrized product vanishes (norm {nrm:.3g}); inputs are linearly dependent",
            nrm)
    return NPartyState(t / nrm, symmetry, ref.grid, ref.spin_dim)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("density matrix must be square")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > 1e-10:
            raise ContractViolation("hermiticity", f"deviation {herm:.3g}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ContractViolation("unit-trace", f"trace {tr}")
        lam = np.linalg.eigvalsh(m)[0]
        if lam < -1e-10:
            raise ContractViolation("positivity", f"eigenvalue {lam:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.entries)[::-1]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.entries, self.entries)))


def partial_trace(state: NPartyState, keep_index: int) -> DensityMatrix:
    n = state.n_parties
    if not 0 <= keep_index < n:
        raise IndexError(f"keep_index {keep_index} outside 0..{n - 1}")
    d = state.single_particle_dim
    m = np.moveaxis(state.coefficients, keep_index, 0).reshape(d, -1)
    rho = m @ m.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def reduced_state_spread(state: NPartyState) -> float:
    """Max operator-norm distance between the reduced states of any two slots."""
    rhos = [partial_trace(state, i).entries for i in range(state.n_parties)]
    return max(float(np.linalg.norm(a - b, ord=2))
               for a, b in itertools.combinations(rhos, 2))


def _apply_factor(F: np.ndarray, T: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(F, T, axes=(1, axis)), 0, axis)


def _permute_matrix(matrix: np.ndarray, d: int, n: int, perm) -> np.ndarray:
    t = matrix.reshape((d,) * (2 * n))
    axes = list(perm) + [n + p for p in perm]
    return np.transpose(t, axes).reshape(d**n, d**n)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator on ``n_parties`` copies of a ``dim``-dimensional space."""

    dim: int
    n_parties: int = 1
    terms: tuple = ()
    matrix: np.ndarray | None = None
    diagonal: np.ndarray | None = None
    _checked: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        forms = sum(x is not None and (not isinstance(x, tuple) or len(x) > 0)
                    for x in (self.terms, self.matrix, self.diagonal))
        if forms != 1:
            raise ConfigurationError("observable needs exactly one representation")
        if self.matrix is not None:
            shape = (self.dim**self.n_parties,) * 2
            if self.matrix.shape != shape:
                raise DimensionError(f"matrix shape {self.matrix.shape}, expected {shape}")
            if np.max(np.abs(self.matrix - self.matrix.conj().T)) > 1e-10:
                raise ContractViolation("hermiticity", "observable matrix is not Hermitian")
        elif self.diagonal is not None:
            if self.diagonal.shape != (self.dim,) * self.n_parties:
                raise DimensionError("diagonal tensor shape mismatch")
            if np.max(np.abs(np.imag(self.diagonal))) > 1e-10:
                raise ContractViolation("hermiticity", "diagonal observable is not real")
        else:
            for _, factors in self.terms:
                if len(factors) != self.n_parties:
                    raise DimensionError("term arity does not match n_parties")
                for f in factors:
                    if f is not None and f.shape != (self.dim, self.dim):
                        raise DimensionError("factor shape mismatch")
            if self.hermiticity_defect() > 1e-10:
                raise ContractViolation("hermiticity", "observable terms are not Hermitian")

    # -- constructors -------------------------------------------------------
    @classmethod
    def single(cls, matrix) -> "Observable":
        m = np.asarray(matrix, dtype=complex)
        return cls(m.shape[0], 1, matrix=m)

    @classmethod
    def dense(cls, matrix, n_parties: int) -> "Observable":
        m = np.asarray(matrix, dtype=complex)
        d = round(m.shape[0] ** (1.0 / n_parties))
        return cls(d, n_parties, matrix=m)

    @classmethod
    def product(cls, *factors, coeff: complex = 1.0) -> "Observable":
        dim = next(np.shape(f)[0] for f in factors if f is not None)
        facs = tuple(None if f is None else np.asarray(f, dtype=complex) for f in factors)
        return cls(dim, len(facs), terms=((complex(coeff), facs),))

    @classmethod
    def position_diagonal(cls, values) -> "Observable":
        v = np.asarray(values, dtype=complex)
        return cls(v.shape[0], v.ndim, diagonal=v)

    # -- algebra ------------------------------------------------------------
    def __add__(self, other: "Observable") -> "Observable":
        if (self.dim, self.n_parties) != (other.dim, other.n_parties):
            raise DimensionError("cannot add observables on different spaces")
        if self.terms and other.terms:
            return Observable(self.dim, self.n_parties, terms=self.terms + other.terms)
        return Observable(self.dim, self.n_parties, matrix=self.to_matrix() + other.to_matrix())

    def scaled(self, c: float) -> "Observable":
        if self.terms:
            return Observable(self.dim, self.n_parties,
                              terms=tuple((c * k, f) for k, f in self.terms))
        if self.matrix is not None:
            return Observable(self.dim, self.n_parties, matrix=c * self.matrix)
        return Observable(self.dim, self.n_parties, diagonal=c * self.diagonal)

    def apply(self, tensor: np.ndarray) -> np.ndarray:
        n, d = self.n_parties, self.dim
        if tensor.shape != (d,) * n:
            raise DimensionError(f"tensor shape {tensor.shape} does not fit observable")
        if self.matrix is not None:
            return (self.matrix @ tensor.reshape(-1)).reshape(tensor.shape)
        if self.diagonal is not None:
            return self.diagonal * tensor
        out = np.zeros_like(tensor, dtype=complex)
        for coeff, factors in self.terms:
            y = tensor
            for axis, f in enumerate(factors):
                if f is not None:
                    y = _apply_factor(f, y, axis)
            out += coeff * y
        return out

    def to_matrix(self) -> np.ndarray:
        d, n = self.dim, self.n_parties
        if self.matrix is not None:
            return self.matrix
        if self.diagonal is not None:
            return np.diag(self.diagonal.reshape(-1))
        if d**n > 4096:
            raise ConfigurationError("refusing to densify an observable beyond 4096 states")
        eye = np.eye(d, dtype=complex)
        total = np.zeros((d**n, d**n), dtype=complex)
        for coeff, factors in self.terms:
            m = np.ones((1, 1), dtype=complex)
            for f in factors:
                m = np.kron(m, eye if f is None else f)
            total += coeff * m
        return total

    def symmetrized(self) -> "Observable":
        """Average of the observable over all slot permutations."""
        n, d = self.n_parties, self.dim
        perms = list(itertools.permutations(range(n)))
        if self.terms:
            new = []
            for coeff, factors in self.terms:
                for perm in perms:
                    permuted = [None] * n
                    for i, p in enumerate(perm):
                        permuted[p] = factors[i]
                    new.append((coeff / len(perms), tuple(permuted)))
            return Observable(d, n, terms=tuple(new))
        if self.matrix is not None:
            m = sum(_permute_matrix(self.matrix, d, n, p) for p in perms) / len(perms)
            return Observable(d, n, matrix=m)
        diag = sum(np.transpose(self.diagonal, p) for p in perms) / len(perms)
        return Observable(d, n, diagonal=diag)

    def _probe(self, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        shape = (self.dim,) * self.n_parties
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    def hermiticity_defect(self) -> float:
        x, y = self._probe(1), self._probe(2)
        lhs = np.vdot(x, self.apply(y))
        rhs = np.vdot(self.apply(x), y)
        scale = max(1.0, abs(lhs))
        return float(abs(lhs - rhs) / scale)

    def permutation_defect(self) -> float:
        """Relative deviation of A P T from P A T for random T, worst transposition."""
        if "perm" in self._checked:
            return self._checked["perm"]
        n = self.n_parties
        t = self._probe(3)
        at = self.apply(t)
        scale = max(1.0, float(np.linalg.norm(at)))
        worst = 0.0
        for i, j in itertools.combinations(range(n), 2):
            axes = _transposition(n, i, j)
            diff = self.apply(np.transpose(t, axes)) - np.transpose(at, axes)
            worst = max(worst, float(np.linalg.norm(diff)) / scale)
        self._checked["perm"] = worst
        return worst

    def is_permutation_symmetric(self, tol: float = 1e-10) -> bool:
        return self.n_parties == 1 or self.permutation_defect() <= tol


# -- single-particle operator builders --------------------------------------

def position_matrix(grid: Grid, spin_dim: int = 1) -> np.ndarray:
    return np.kron(np.diag(grid.x), np.eye(spin_dim)).astype(complex)


def momentum_matrix(grid: Grid, spin_dim: int = 1) -> np.ndarray:
    """Spectral momentum operator F^dagger diag(k) F on the periodic grid."""
    n = grid.n_points
    f = np.fft.fft(np.eye(n), axis=0, norm="ortho")
    p = f.conj().T @ np.diag(grid.k) @ f
    p = 0.5 * (p + p.conj().T)
    return np.kron(p, np.eye(spin_dim))


def region_projector(grid: Grid, region, spin_dim: int = 1) -> np.ndarray:
    lo, hi = region
    return np.kron(np.diag(grid.mask(lo, hi).astype(float)), np.eye(spin_dim)).astype(complex)


def spin_axis(axis) -> np.ndarray:
    """Unit 3-vector from an angle (x-z plane, measured from z) or a 3-vector."""
    if np.ndim(axis) == 0:
        return np.array([np.sin(axis), 0.0, np.cos(axis)])
    v = np.asarray(axis, dtype=float)
    return v / np.linalg.norm(v)


def spin_projector(axis, outcome: int) -> np.ndarray:
    n = spin_axis(axis)
    n_sigma = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return 0.5 * (np.eye(2) + outcome * n_sigma)


def embed(op, slot: int, n_parties: int) -> Observable:
    """Single-party operator acting on ``slot`` of an n-party space."""
    m = op.matrix if isinstance(op, Observable) else np.asarray(op, dtype=complex)
    if not 0 <= slot < n_parties:
        raise IndexError(f"slot {slot} outside 0..{n_parties - 1}")
    factors = [None] * n_parties
    factors[slot] = m
    return Observable.product(*factors)


def symmetric_sum(op, n_parties: int) -> Observable:
    """One-body observable sum_i op_i."""
    m = op.matrix if isinstance(op, Observable) else np.asarray(op, dtype=complex)
    terms = []
    for slot in range(n_parties):
        factors = [None] * n_parties
        factors[slot] = m
        terms.append((1.0 + 0j, tuple(factors)))
    return Observable(m.shape[0], n_parties, terms=tuple(terms))


# -- expectation values -----------------------------------------------------

def expectation(state: NPartyState, A: Observable) -> float:
    if A.dim != state.single_particle_dim or A.n_parties != state.n_parties:
        raise DimensionError("observable does not act on this state space")
    if state.symmetry is not Symmetry.NONE and not A.is_permutation_symmetric():
        raise ContractViolation(
            "observable-symmetry",
            "identical-particle states only admit permutation-symmetric observables")
    t = state.coefficients
    val = np.vdot(t, A.apply(t))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ContractViolation("real-expectation", f"imaginary residue {val.imag:.3g}")
    return float(val.real)


def exchange_term(phi: WaveFunction, psi: WaveFunction, A: Observable) -> complex:
    """Cross matrix element <phi (x) psi| A |psi (x) phi>."""
    if phi.grid != psi.grid or phi.spin_dim != psi.spin_dim:
        raise DimensionError("phi and psi must share grid and spin_dim")
    if A.n_parties != 2 or A.dim != phi.dim:
        raise DimensionError("exchange term needs a two-party observable on this space")
    a, b = phi.vector, psi.vector
    return complex(np.vdot(np.outer(a, b), A.apply(np.outer(b, a))))


def epr_state(phi: WaveFunction, psi: WaveFunction, form: str = "full") -> NPartyState:
    """Spatial packets times the spin singlet.

    ``form="full"`` symmetrizes the spatial part (overall antisymmetric);
    ``form="pragmatic"`` keeps the bare product phi (x) psi, which is only
    adequate for disjoint packets. The latter is flagged in ``warnings`` when
    the packets overlap.
    """
    if phi.spin_dim != 1 or psi.spin_dim != 1:
        raise DimensionError("EPR construction expects spinless spatial packets")
    if phi.grid != psi.grid:
        raise DimensionError("packets on different grids")
    a, b = phi.vector, psi.vector
    warnings: tuple[str, ...] = ()
    if form == "full":
        spatial = np.outer(a, b) + np.outer(b, a)
        symmetry = Symmetry.FERMIONIC
    elif form == "pragmatic":
        spatial = np.outer(a, b)
        symmetry = Symmetry.NONE
        if overlap_measure(phi, psi) > OVERLAP_WARN:
            warnings = ("pragmatic-form-on-overlapping-packets",)
    else:
        raise ConfigurationError(f"unknown EPR form {form!r}")
    spatial = spatial / np.linalg.norm(spatial)
    n = phi.grid.n_points
    t = np.einsum("ab,st->asbt", spatial, SINGLET).reshape(2 * n, 2 * n)
    return NPartyState(t, symmetry, phi.grid, 2, warnings)


def _check_disjoint(regions) -> None:
    for (a0, a1), (b0, b1) in itertools.combinations(regions, 2):
        if max(a0, b0) < min(a1, b1):
            raise ContractViolation("disjoint-regions", f"regions {(a0, a1)} and {(b0, b1)} overlap")


@dataclass(frozen=True)
class SpinCorrelation:
    table: dict
    correlator: float
    detection_probability: float


def spin_correlation(state: NPartyState, region_a, axis_a, region_b, axis_b) -> SpinCorrelation:
    """Spin outcome statistics given one detection in each region.

    Joint outcome projectors are symmetrized over slots, so the same numbers
    come out for symmetrized and unsymmetrized states.
    """
    if state.spin_dim != 2 or state.grid is None or state.n_parties != 2:
        raise DimensionError("spin correlation needs a two-party spinful grid state")
    _check_disjoint([region_a, region_b])
    grid = state.grid
    pa = np.diag(grid.mask(*region_a).astype(complex))
    pb = np.diag(grid.mask(*region_b).astype(complex))
    raw = {}
    for sa, sb in itertools.product((1, -1), repeat=2):
        fa = np.kron(pa, spin_projector(axis_a, sa))
        fb = np.kron(pb, spin_projector(axis_b, sb))
        joint = Observable.product(fa, fb) + Observable.product(fb, fa)
        raw[(sa, sb)] = expectation(state, joint)
    detected = sum(raw.values())
    if detected <= 0:
        raise ContractViolation("detection", "no probability of one particle in each region")
    table = {k: v / detected for k, v in raw.items()}
    corr = sum(sa * sb * p for (sa, sb), p in table.items())
    return SpinCorrelation(table, float(corr), float(detected))


def commutator_norm(A, slot_i: int, B, slot_j: int, n_parties: int = 2,
                    iterations: int = 200, seed: int = 0) -> float:
    """Operator norm of [A_i, B_j] for single-party A, B embedded in n slots.

    Estimated by power iteration on C^dagger C with a fixed seed, so the result
    is deterministic and exactly zero when the commutator annihilates.
    """
    a = A.matrix if isinstance(A, Observable) else np.asarray(A, dtype=complex)
    b = B.matrix if isinstance(B, Observable) else np.asarray(B, dtype=complex)
    if a.shape != b.shape:
        raise DimensionError("A and B must act on the same single-particle space")
    for s in (slot_i, slot_j):
        if not 0 <= s < n_parties:
            raise IndexError(f"slot {s} outside 0..{n_parties - 1}")
    d = a.shape[0]

    def comm(t):
        return (_apply_factor(a, _apply_factor(b, t, slot_j), slot_i)
                - _apply_factor(b, _apply_factor(a, t, slot_i), slot_j))

    def comm_dag(t):
        return (_apply_factor(b.conj().T, _apply_factor(a.conj().T, t, slot_i), slot_j)
                - _apply_factor(a.conj().T, _apply_factor(b.conj().T, t, slot_j), slot_i))

    rng = np.random.default_rng(seed)
    shape = (d,) * n_parties
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = comm_dag(comm(v))
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return float(np.linalg.norm(comm(v)))
        estimate = np.sqrt(nrm)
        v = w / nrm
    return float(max(estimate, np.linalg.norm(comm(v))))
