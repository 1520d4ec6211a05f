import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emergent_particles.errors import ConfigurationError, ContractViolation, DimensionError, InfeasibleError
from emergent_particles.grid import PacketParams, WaveFunction, gaussian_packet, make_grid, overlap_measure
from emergent_particles.manybody import product_state, symmetrized_product
from emergent_particles.stats import (boltzmann_reference, joint_detection, occupation_distribution,
                                      outcome_label, table_distance)


def test_two_particles_two_modes():
    fd = occupation_distribution(2, 2, "FD").entries
    be = occupation_distribution(2, 2, "BE").entries
    mb = occupation_distribution(2, 2, "MB").entries
    assert fd == {(1, 1): 1.0}
    assert be == pytest.approx({(2, 0): 1 / 3, (1, 1): 1 / 3, (0, 2): 1 / 3})
    assert mb == pytest.approx({(2, 0): 0.25, (1, 1): 0.5, (0, 2): 0.25})


def test_fermions_infeasible():
    with pytest.raises(InfeasibleError):
        occupation_distribution(3, 2, "FD")
    with pytest.raises(ConfigurationError):
        occupation_distribution(2, 2, "XY")
    with pytest.raises(ConfigurationError):
        occupation_distribution(7, 2, "BE")


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 5), k=st.integers(1, 6), stat=st.sampled_from(["FD", "BE", "MB"]))
def test_state_counts(n, k, stat):
    from math import comb
    if stat == "FD" and n > k:
        return
    table = occupation_distribution(n, k, stat)
    assert sum(table.entries.values()) == pytest.approx(1.0, abs=1e-12)
    expected = {"FD": comb(k, n), "BE": comb(n + k - 1, n), "MB": comb(n + k - 1, n)}[stat]
    assert len(table.entries) == expected
    assert all(sum(occ) == n for occ in table.entries)
    # MB single-mode marginal is binomial(n, 1/k)
    if stat == "MB":
        marg = table.marginal(0)
        assert marg.get(0, 0.0) == pytest.approx((1 - 1 / k) ** n)


def test_detection_counts_sum_to_one(disjoint_pair):
    regions = [(-10.0, 0.0), (0.0, 10.0)]
    table = joint_detection(symmetrized_product(disjoint_pair, "bosonic"), regions)
    assert sum(table.values()) == pytest.approx(1.0)
    assert table[(1, 1)] == pytest.approx(1.0, abs=1e-12)
    assert [outcome_label(k) for k in table] == ["(2,0)", "(1,1)", "(1,0)", "(0,2)", "(0,1)", "(0,0)"]


def test_uncounted_particles(disjoint_pair):
    table = joint_detection(product_state(disjoint_pair), [(-8.0, -0.5)])
    assert table[(1,)] == pytest.approx(1.0, abs=1e-10)


def test_product_rule_reference():
    g = make_grid(-12.0, 12.0, 256)
    phi = gaussian_packet(g, PacketParams(-1.0, 0.0, 1.0))
    psi = gaussian_packet(g, PacketParams(1.5, 0.0, 1.0))
    regions = [(-12.0, 0.0), (0.0, 12.0)]
    ref = boltzmann_reference(phi, psi, regions)
    qa = np.sum(phi.density[g.mask(-12.0, 0.0)]) * g.dx
    qb = np.sum(psi.density[g.mask(-12.0, 0.0)]) * g.dx
    assert ref[(2, 0)] == pytest.approx(qa * qb, abs=1e-12)
    assert ref[(1, 1)] == pytest.approx(qa * (1 - qb) + (1 - qa) * qb, abs=1e-12)
    # the product state reproduces the product rule exactly
    assert table_distance(joint_detection(product_state([phi, psi]), regions), ref) <= 1e-12


def test_bunching_and_antibunching():
    g = make_grid(-12.0, 12.0, 256)
    phi = gaussian_packet(g, PacketParams(-0.5, 0.0, 1.0))
    psi = gaussian_packet(g, PacketParams(0.5, 0.0, 1.0))
    regions = [(-12.0, 0.0), (0.0, 12.0)]
    ref = boltzmann_reference(phi, psi, regions)
    bos = joint_detection(symmetrized_product([phi, psi], "bosonic"), regions)
    fer = joint_detection(symmetrized_product([phi, psi], "fermionic"), regions)
    assert bos[(2, 0)] > ref[(2, 0)] > fer[(2, 0)]


def test_reduction_ladder():
    g = make_grid(-12.0, 12.0, 256)
    regions = [(-12.0, 0.0), (0.0, 12.0)]
    prev = {"bosonic": np.inf, "fermionic": np.inf}
    for s in (1.0, 2.0, 3.0, 4.0, 6.0, 8.0):
        phi = gaussian_packet(g, PacketParams(-s / 2, 0.0, 0.5))
        psi = gaussian_packet(g, PacketParams(s / 2, 0.0, 0.5))
        ref = boltzmann_reference(phi, psi, regions)
        for sym in prev:
            d = table_distance(joint_detection(symmetrized_product([phi, psi], sym), regions), ref)
            assert d < prev[sym] or d <= 1e-12
            prev[sym] = d
            if overlap_measure(phi, psi) < 1e-8:
                assert d <= 1e-8


def test_region_checks(disjoint_pair):
    state = symmetrized_product(disjoint_pair, "bosonic")
    with pytest.raises(ContractViolation) as info:
        joint_detection(state, [(-10.0, 1.0), (0.0, 10.0)])
    assert info.value.contract == "disjoint-regions"
    with pytest.raises(ConfigurationError):
        joint_detection(state, [(1.0, 1.0)])
    g = make_grid(0.0, 1.0, 8)
    three = symmetrized_product([WaveFunction.from_vector(g, v) for v in np.eye(8)[:3]], "bosonic")
    with pytest.raises(DimensionError):
        joint_detection(three, [(-10.0, 0.0)])


def test_both_packets_in_one_region(disjoint_pair):
    regions = [(-10.0, 10.0 - 1e-9)]
    assert boltzmann_reference(*disjoint_pair, regions)[(2,)] == pytest.approx(1.0, abs=1e-10)
    for sym in ("bosonic", "fermionic"):
        table = joint_detection(symmetrized_product(disjoint_pair, sym), [(-6.0, -2.0 + 1e-9), (2.0, 6.0)])
        assert sum(table.values()) == pytest.approx(1.0, abs=1e-10)
        assert min(table.values()) >= -1e-12


def test_overlapping_packets_deviation_matches_exchange_integral():
    g = make_grid(-12.0, 12.0, 256)
    phi = gaussian_packet(g, PacketParams(0.0, 0.0, 1.0))
    psi = gaussian_packet(g, PacketParams(1.0, 0.0, 1.0))
    regions = [(-12.0, 0.5), (0.5, 12.0)]
    ref = boltzmann_reference(phi, psi, regions)
    left = g.mask(-12.0, 0.5)
    q_phi = np.sum(phi.density[left]) * g.dx
    q_psi = np.sum(psi.density[left]) * g.dx
    ex = abs(np.sum(np.conj(phi.amplitudes[left]) * psi.amplitudes[left]) * g.dx) ** 2
    s2 = abs(np.sum(np.conj(phi.amplitudes) * psi.amplitudes) * g.dx) ** 2
    for sym, sign in (("bosonic", 1), ("fermionic", -1)):
        table = joint_detection(symmetrized_product([phi, psi], sym), regions)
        assert table_distance(table, ref) > 1e-3
        expected = (q_phi * q_psi + sign * ex) / (1 + sign * s2) - q_phi * q_psi
        assert table[(2, 0)] - ref[(2, 0)] == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 4), (5, 3), (6, 8)])
def test_mb_marginal_is_binomial(n, k):
    from math import comb
    marg = occupation_distribution(n, k, "MB").marginal(k - 1)
    for c in range(n + 1):
        assert marg.get(c, 0.0) == pytest.approx(comb(n, c) * (1 / k) ** c * (1 - 1 / k) ** (n - c), abs=1e-12)
