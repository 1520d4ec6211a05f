import itertools

import pytest
from hypothesis import given, settings, strategies as st

from emergent_particles.classical import (ClassicalEnsemble, evolve_ensemble, index_marginal,
                                          occupied_states, permute_point, permuted_ensemble,
                                          phase_point)
from emergent_particles.dynamics import PotentialSpec
from emergent_particles.errors import ConfigurationError, ContractViolation

SEED = [(-1.0, 0.5), (0.0, -0.3), (2.0, 0.1)]


def test_three_particle_ensemble():
    ens = permuted_ensemble(SEED)
    assert len(ens.points) == 6
    assert ens.is_permutation_closed()
    for i in range(3):
        assert index_marginal(ens, i) == frozenset(SEED)
    with pytest.raises(IndexError):
        index_marginal(ens, 3)


def test_coincident_states_collapse():
    ens = permuted_ensemble([(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])
    assert len(ens.points) == 3


def test_size_limits():
    with pytest.raises(ConfigurationError):
        permuted_ensemble([(float(i), 0.0) for i in range(7)])
    with pytest.raises(ConfigurationError):
        phase_point([(float("nan"), 0.0)])


coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@settings(max_examples=25, deadline=None)
@given(seed=st.lists(st.tuples(coords, coords), min_size=2, max_size=4, unique=True),
       kind=st.sampled_from(["harmonic", "quartic", "free"]))
def test_evolution_commutes_with_permutation(seed, kind):
    pot = {"harmonic": PotentialSpec.harmonic(1.3), "quartic": PotentialSpec.quartic(0.05),
           "free": PotentialSpec.free()}[kind]
    ens = permuted_ensemble(seed)
    evolved = evolve_ensemble(ens, pot, 0.01, 200)
    (moved,) = evolve_ensemble(ClassicalEnsemble(len(seed), frozenset([phase_point(seed)])),
                               pot, 0.01, 200).points
    assert evolved.points == permuted_ensemble(moved).points
    assert evolved.is_permutation_closed()


def test_occupied_states_member_invariant():
    ens = evolve_ensemble(permuted_ensemble(SEED), PotentialSpec.harmonic(1.0), 0.01, 100)
    results = {occupied_states(ens, member=m) for m in ens.points}
    assert len(results) == 1
    for perm in itertools.permutations(range(3)):
        reseeded = permuted_ensemble(permute_point(phase_point(SEED), perm))
        assert occupied_states(reseeded) == occupied_states(permuted_ensemble(SEED))


def test_occupied_states_rejects_mixed_ensemble():
    ens = ClassicalEnsemble(2, frozenset([((0.0, 0.0), (1.0, 0.0)), ((5.0, 0.0), (1.0, 0.0))]))
    assert not ens.is_permutation_closed()
    with pytest.raises(ContractViolation):
        occupied_states(ens)


def test_small_ensembles():
    assert len(permuted_ensemble([(0.5, 1.0)]).points) == 1
    assert len(permuted_ensemble([(0.5, 1.0), (0.5, 1.0)]).points) == 1
    single = ClassicalEnsemble(3, frozenset([phase_point(SEED)]))
    assert index_marginal(single, 1) == frozenset([SEED[1]])


@pytest.mark.parametrize("seed", [SEED, [(0.0, 0.0), (0.0, 0.0), (1.0, 1.0), (2.0, 0.0)],
                                  [(float(i), 0.0) for i in range(5)]])
def test_point_count_divides_factorial(seed):
    from math import factorial
    count = len(permuted_ensemble(seed).points)
    assert factorial(len(seed)) % count == 0
    assert (count == factorial(len(seed))) == (len(set(seed)) == len(seed))


def test_harmonic_period_and_free_translation():
    import math
    ens = permuted_ensemble(SEED)
    back = evolve_ensemble(ens, PotentialSpec.harmonic(1.0), 2 * math.pi / 20000, 20000)
    for a, b in zip(ens.sorted_points(), back.sorted_points()):
        for (x0, p0), (x1, p1) in zip(a, b):
            assert abs(x0 - x1) <= 1e-6 and abs(p0 - p1) <= 1e-6
    moved = evolve_ensemble(ens, PotentialSpec.free(2.0), 0.01, 100)
    expected = permuted_ensemble([(x + p / 2.0 * 1.0, p) for x, p in SEED])
    for a, b in zip(moved.sorted_points(), expected.sorted_points()):
        for (x0, p0), (x1, p1) in zip(a, b):
            assert x0 == pytest.approx(x1, abs=1e-12) and p0 == p1
