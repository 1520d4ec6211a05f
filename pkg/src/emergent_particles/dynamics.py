"""Wave-packet dynamics: closed split-step evolution, Ehrenfest diagnostics,
classical leapfrog reference and open-system density-matrix evolution.

The open-system generator is the high-temperature pure-decoherence form

    d rho/dt = -i [H, rho] - D (x - x')^2 rho - gamma (x - x') (d/dx - d/dx') rho

with the damping term optional (gamma = 0 by default).
"""
from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import (BoundaryLeakError, ConfigurationError, ContractViolation,
                     NumericalInstabilityError)
from .grid import LEAK_TOL, Grid, WaveFunction, localization_interval, moments

NORM_DRIFT_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-6
POSITIVITY_TOL = 1e-4
STATE_POSITIVITY_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    kind: str = "free"
    mass: float = 1.0
    omega: float = 0.0
    lam: float = 0.0
    table_x: np.ndarray | None = None
    table_v: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("free", "harmonic", "quartic", "custom"):
            raise ConfigurationError(f"unknown potential kind {self.kind!r}")
        if not self.mass > 0:
            raise ConfigurationError(f"mass must be positive, got {self.mass}")
        if self.kind == "custom":
            if self.table_x is None or self.table_v is None:
                raise ConfigurationError("custom potential needs table_x and table_v")
            if not np.all(np.isfinite(self.table_v)):
                raise ConfigurationError("custom potential table has non-finite values")

    @classmethod
    def free(cls, mass: float = 1.0):
        return cls("free", mass)

    @classmethod
    def harmonic(cls, omega: float, mass: float = 1.0):
        return cls("harmonic", mass, omega=omega)

    @classmethod
    def quartic(cls, lam: float, mass: float = 1.0):
        return cls("quartic", mass, lam=lam)

    @classmethod
    def custom(cls, x, v, mass: float = 1.0):
        return cls("custom", mass, table_x=np.asarray(x, float), table_v=np.asarray(v, float))

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return 0.5 * self.mass * self.omega**2 * (x * x)
        if self.kind == "quartic":
            return self.lam * (x * x * x * x)
        return np.interp(x, self.table_x, self.table_v)

    def force(self, x):
        # products rather than powers: bitwise identical per element
        x = np.asarray(x, dtype=float)
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "harmonic":
            return -(self.mass * self.omega**2) * x
        if self.kind == "quartic":
            return -4.0 * self.lam * (x * x * x)
        grad = np.gradient(self.table_v, self.table_x)
        return -np.interp(x, self.table_x, grad)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray | None = None
    energy: np.ndarray | None = None
    snapshots: tuple[WaveFunction, ...] | None = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("mean_x", "mean_p", "var_x"):
            if len(getattr(self, name)) != n:
                raise ContractViolation("trajectory-shape", f"{name} length differs from times")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ContractViolation("trajectory-shape", "times must increase strictly")


def _edge_points(grid: Grid) -> int:
    return max(1, grid.n_points // 32)


def _check_edges(density: np.ndarray, grid: Grid, t: float) -> None:
    e = _edge_points(grid)
    leaked = (density[:e].sum() + density[-e:].sum()) * grid.dx
    if leaked > LEAK_TOL:
        raise BoundaryLeakError(f"{leaked:.3g} of the probability reached the grid edge at t={t:g}")


def energy(wf: WaveFunction, pot: PotentialSpec) -> float:
    grid = wf.grid
    phi = np.fft.fft(wf.spinor_field, axis=0)
    pk = np.sum(np.abs(phi) ** 2, axis=1)
    kinetic = np.dot(pk / pk.sum(), grid.k**2) / (2 * pot.mass)
    rho = wf.density
    return float(kinetic + np.dot(rho / rho.sum(), pot.potential(grid.x)))


def evolve_unitary(wf: WaveFunction, pot: PotentialSpec, dt: float, steps: int,
                   record_every: int = 1, keep_snapshots: bool = True) -> Trajectory:
    """Strang split-step evolution (half potential, kinetic, half potential)."""
    if dt <= 0 or steps < 1 or record_every < 1:
        raise ConfigurationError("need dt > 0, steps >= 1, record_every >= 1")
    grid = wf.grid
    half_v = np.exp(-0.5j * dt * pot.potential(grid.x))[:, None]
    kin = np.exp(-0.5j * dt * grid.k**2 / pot.mass)[:, None]
    psi = wf.spinor_field.astype(complex)
    norm0 = wf.norm

    times, rows, snaps = [], [], []

    def record(t, field):
        state = WaveFunction(grid, field.reshape(-1), wf.spin_dim)
        _check_edges(state.density, grid, t)
        times.append(t)
        rows.append(moments(state) + (energy(state, pot),))
        if keep_snapshots:
            snaps.append(state)

    record(0.0, psi)
    for step in range(1, steps + 1):
        psi = half_v * psi
        psi = np.fft.ifft(kin * np.fft.fft(psi, axis=0), axis=0)
        psi = half_v * psi
        if step % record_every == 0:
            record(step * dt, psi)
    if steps % record_every:
        record(steps * dt, psi)

    final = WaveFunction(grid, psi.reshape(-1), wf.spin_dim)
    drift = abs(final.norm - norm0)
    if drift > NORM_DRIFT_TOL:
        raise ContractViolation("norm-drift", f"norm drifted by {drift:.3g}")
    data = np.array(rows)
    return Trajectory(np.array(times), data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                      data[:, 4], tuple(snaps) if keep_snapshots else None)


def leapfrog(x, p, pot: PotentialSpec, dt: float, steps: int, record_every: int = 0):
    """Kick-drift-kick integration of m x'' = F(x), elementwise over arrays.

    Returns final (x, p) and, when ``record_every`` > 0, the recorded
    (times, xs, ps) history including t = 0.
    """
    x = np.array(x, dtype=float)
    p = np.array(p, dtype=float)
    m = pot.mass
    f = pot.force(x)
    hist_t, hist_x, hist_p = [0.0], [x.copy()], [p.copy()]
    for step in range(1, steps + 1):
        p = p + (0.5 * dt) * f
        x = x + dt * (p / m)
        f = pot.force(x)
        p = p + (0.5 * dt) * f
        if record_every and (step % record_every == 0 or step == steps):
            hist_t.append(step * dt)
            hist_x.append(x.copy())
            hist_p.append(p.copy())
    if record_every:
        return x, p, (np.array(hist_t), np.array(hist_x), np.array(hist_p))
    return x, p


def classical_reference(pot: PotentialSpec, x0: float, p0: float, dt: float, steps: int,
                        record_every: int = 1) -> Trajectory:
    _, _, (t, xs, ps) = leapfrog(x0, p0, pot, dt, steps, record_every)
    e = 0.5 * ps**2 / pot.mass + pot.potential(xs)
    return Trajectory(t, xs, ps, np.zeros_like(xs), np.zeros_like(xs), e)


def ehrenfest_residual(traj: Trajectory, pot: PotentialSpec, force: str = "mean") -> np.ndarray:
    """|m d^2<x>/dt^2 - F| at interior samples, second derivative by central differences.

    ``force="mean"`` uses the quantum mean force <F(x)> from the snapshots;
    ``force="classical"`` uses F(<x>), measuring how far the packet centre is
    from obeying the classical law.
    """
    if len(traj.times) < 5:
        raise ContractViolation("ehrenfest-samples", "need at least 5 recorded samples")
    h = np.diff(traj.times)
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise ContractViolation("ehrenfest-samples", "recorded times must be uniformly spaced")
    h = h[0]
    x = traj.mean_x
    acc = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / h**2
    if force == "mean":
        if traj.snapshots is None:
            raise ContractViolation("ehrenfest-snapshots", "trajectory carries no snapshots")
        f = np.array([np.dot(s.density, pot.force(s.grid.x)) * s.grid.dx
                      for s in traj.snapshots[1:-1]])
    elif force == "classical":
        f = pot.force(x[1:-1])
    else:
        raise ConfigurationError(f"force must be 'mean' or 'classical', got {force!r}")
    return np.abs(pot.mass * acc - f)


def spreading_variance(t, sigma0: float, mass: float = 1.0):
    """Free Gaussian position variance sigma0^2 + (t / (2 m sigma0))^2."""
    t = np.asarray(t, dtype=float)
    return sigma0**2 + (t / (2.0 * mass * sigma0)) ** 2


# -- open systems -----------------------------------------------------------

@dataclass(frozen=True)
class OpenSystemParams:
    D: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.D < 0 or self.gamma < 0:
            raise ConfigurationError("decoherence rate and damping must be non-negative")


@dataclass(frozen=True, eq=False)
class PositionDensityMatrix:
    """rho(x, x') on a grid, continuum normalized: trace(rho) * dx = 1."""

    grid: Grid
    entries: np.ndarray
    # evolve_open monitors positivity itself (at POSITIVITY_TOL) and skips this check
    check_positivity: InitVar[bool] = True

    def __post_init__(self, check_positivity):
        m = np.asarray(self.entries, dtype=complex)
        n = self.grid.n_points
        if m.shape != (n, n):
            raise ConfigurationError(f"density matrix must be {n}x{n}")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > 1e-9:
            raise ContractViolation("hermiticity", f"deviation {herm:.3g}")
        tr = np.trace(m).real * self.grid.dx
        if abs(tr - 1.0) > 1e-8:
            raise ContractViolation("unit-trace", f"trace*dx = {tr}")
        if check_positivity:
            lam = np.linalg.eigvalsh(0.5 * (m + m.conj().T) * self.grid.dx)[0]
            if lam < -STATE_POSITIVITY_TOL:
                raise ContractViolation("positivity", f"eigenvalue {lam:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_wavefunction(cls, wf: WaveFunction) -> "PositionDensityMatrix":
        if wf.spin_dim != 1:
            raise ConfigurationError("position density matrices are spinless")
        a = wf.amplitudes
        return cls(wf.grid, np.outer(a, a.conj()))

    @classmethod
    def mixture(cls, states, weights) -> "PositionDensityMatrix":
        weights = np.asarray(weights, dtype=float)
        weights = weights / weights.sum()
        m = sum(w * np.outer(s.amplitudes, s.amplitudes.conj()) for w, s in zip(weights, states))
        return cls(states[0].grid, m)

    @property
    def discrete(self) -> np.ndarray:
        """Matrix in the orthonormal grid basis (unit trace)."""
        return self.entries * self.grid.dx

    def trace(self) -> float:
        return float(np.trace(self.entries).real * self.grid.dx)

    def purity(self) -> float:
        d = self.discrete
        return float(np.real(np.vdot(d, d)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.discrete)[0])

    @property
    def density(self) -> np.ndarray:
        return np.real(np.diag(self.entries))


@dataclass(frozen=True, eq=False)
class OpenTrajectory:
    times: np.ndarray
    states: tuple[PositionDensityMatrix, ...]


def evolve_open(rho: PositionDensityMatrix, pot: PotentialSpec, params: OpenSystemParams,
                dt: float, steps: int, record_every: int = 1) -> OpenTrajectory:
    """Split-step evolution of rho(x, x').

    Potential phase and decoherence suppression are applied as exact
    pointwise factors in two half steps around the spectral kinetic step; the
    damping term, when present, is an explicit first-order step.
    """
    if dt <= 0 or steps < 1 or record_every < 1:
        raise ConfigurationError("need dt > 0, steps >= 1, record_every >= 1")
    grid = rho.grid
    x = grid.x
    k = grid.k
    v = pot.potential(x)
    sep = x[:, None] - x[None, :]
    half = np.exp(-0.5j * dt * (v[:, None] - v[None, :]) - 0.5 * dt * params.D * sep**2)
    kin = np.exp(-0.5j * dt * k**2 / pot.mass)[:, None]
    ik = (1j * k)[:, None]

    def kinetic_left(m):
        return np.fft.ifft(kin * np.fft.fft(m, axis=0), axis=0)

    def ddx(m):
        return np.fft.ifft(ik * np.fft.fft(m, axis=0), axis=0)

    r = rho.entries.astype(complex)
    tr0 = rho.trace()
    times, states = [0.0], [rho]

    def check_and_record(t, m):
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real * grid.dx
        if abs(tr - tr0) > TRACE_DRIFT_TOL:
            raise NumericalInstabilityError(f"trace drifted by {abs(tr - tr0):.3g} at t={t:g}")
        lam = np.linalg.eigvalsh(m * grid.dx)[0]
        if lam < -POSITIVITY_TOL:
            raise NumericalInstabilityError(f"eigenvalue {lam:.3g} at t={t:g}")
        _check_edges(np.real(np.diag(m)), grid, t)
        times.append(t)
        states.append(PositionDensityMatrix(grid, m, check_positivity=False))

    for step in range(1, steps + 1):
        r = half * r
        r = kinetic_left(r)
        r = kinetic_left(r.conj().T).conj().T
        r = half * r
        if params.gamma > 0:
            dr = ddx(r) - ddx(r.T).T
            r = r - dt * params.gamma * sep * dr
        if step % record_every == 0 or step == steps:
            check_and_record(step * dt, r)
    return OpenTrajectory(np.array(times), tuple(states))


def coherence_length(rho: PositionDensityMatrix) -> float:
    """Largest |x - x'| whose band-averaged |rho| reaches exp(-1) of the diagonal's.

    Band averages are taken over all n grid points (entries falling off the
    grid count as zero), so a pure Gaussian of width sigma gives sqrt(8) sigma.
    """
    m = np.abs(rho.entries)
    n = rho.grid.n_points
    bands = np.array([np.sum(np.diagonal(m, offset=o)) for o in range(n)]) / n
    above = np.nonzero(bands >= np.exp(-1.0) * bands[0])[0]
    return float(above.max() * rho.grid.dx)


def off_diagonal_magnitude(rho: PositionDensityMatrix, x_a: float, x_b: float) -> float:
    g = rho.grid
    return float(abs(rho.entries[g.index_of(x_a), g.index_of(x_b)]))


@dataclass(frozen=True, eq=False)
class MixtureComponent:
    weight: float
    center: float
    width: float
    state: WaveFunction


def mixture_analysis(rho: PositionDensityMatrix, top_k: int = 2, degeneracy_tol: float = 0.1,
                     delta: float = 0.01) -> list[MixtureComponent]:
    """Leading eigen-components of rho with their localization intervals.

    Eigenvalues among the top ``top_k`` that lie within ``degeneracy_tol`` of
    their neighbour form a cluster. The eigenbasis of a (near-)degenerate
    cluster is not fixed by rho, so inside each cluster the basis that
    diagonalizes the position operator is reported instead (the most
    localized choice in 1D), with weights <v|rho|v>. Set ``degeneracy_tol=0``
    for the plain eigendecomposition.
    """
    grid = rho.grid
    d = rho.discrete
    lam, vec = np.linalg.eigh(0.5 * (d + d.conj().T))
    order = np.argsort(lam)[::-1][:top_k]
    lam, vec = lam[order], vec[:, order]

    clusters, current = [], [0]
    for i in range(1, len(lam)):
        if lam[current[-1]] - lam[i] <= degeneracy_tol:
            current.append(i)
        else:
            clusters.append(current)
            current = [i]
    clusters.append(current)

    comps = []
    for cl in clusters:
        block = vec[:, cl]
        if len(cl) > 1:
            xs = block.conj().T @ (grid.x[:, None] * block)
            _, w = np.linalg.eigh(0.5 * (xs + xs.conj().T))
            block = block @ w
        for v in block.T:
            weight = float(np.real(np.vdot(v, d @ v)))
            wf = WaveFunction.from_vector(grid, v)
            length, center = localization_interval(wf, delta)
            comps.append(MixtureComponent(weight, center, length, wf))
    comps.sort(key=lambda c: -c.weight)
    return comps


def fit_decay_rate(times, magnitudes) -> float:
    """Least-squares slope of -log(magnitude) against time."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(magnitudes, dtype=float))
    slope = np.polyfit(t, y, 1)[0]
    return float(-slope)
