# # Counting statistics, classical permutations and commutators
#
# Quantum detection statistics of two identical packets approach the
# distinguishable product rule as the packets separate. A classical ensemble
# built from all n! relabellings of one phase point carries no physical
# information in its labels. Operators on different slots always commute.

# %%
import numpy as np

from emergent_particles.classical import evolve_ensemble, index_marginal, occupied_states, permuted_ensemble
from emergent_particles.dynamics import PotentialSpec
from emergent_particles.grid import PacketParams, gaussian_packet, make_grid
from emergent_particles.manybody import commutator_norm, momentum_matrix, position_matrix, symmetrized_product
from emergent_particles.stats import (boltzmann_reference, joint_detection, occupation_distribution,
                                      outcome_label, table_distance)

for stat in ("FD", "BE", "MB"):
    table = occupation_distribution(2, 2, stat)
    print(stat, {outcome_label(k): round(v, 4) for k, v in table.entries.items()})

# %%
grid = make_grid(-12.0, 12.0, 256)
regions = [(-12.0, 0.0), (0.0, 12.0)]
for s in (1.0, 2.0, 3.0, 4.0, 6.0, 8.0):
    phi = gaussian_packet(grid, PacketParams(-s / 2, 0.0, 0.5))
    psi = gaussian_packet(grid, PacketParams(s / 2, 0.0, 0.5))
    ref = boltzmann_reference(phi, psi, regions)
    db = table_distance(joint_detection(symmetrized_product([phi, psi], "bosonic"), regions), ref)
    df = table_distance(joint_detection(symmetrized_product([phi, psi], "fermionic"), regions), ref)
    print(f"separation {s:3.1f}: distance to product rule  bosons {db:.2e}  fermions {df:.2e}")

# %%
ens = permuted_ensemble([(-1.0, 0.5), (0.0, -0.3), (2.0, 0.1)])
print("points:", len(ens.points))
print("slot 0 marginal == slot 2 marginal:", index_marginal(ens, 0) == index_marginal(ens, 2))
later = evolve_ensemble(ens, PotentialSpec.harmonic(1.0), 0.01, 300)
print("closed under permutation after evolution:", later.is_permutation_closed())
print("occupied states:", [tuple(round(c, 4) for c in s) for s in occupied_states(later)])

# %%
g = make_grid(-5.0, 5.0, 64)
x, p = position_matrix(g), momentum_matrix(g)
print("||[x_0, p_1]|| =", commutator_norm(x, 0, p, 1))
print("||[x_0, p_0]|| =", round(commutator_norm(x, 0, p, 0), 3))
