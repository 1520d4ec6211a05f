# # Identical particles: reduced states, exclusion and the exchange term
#
# Two packets on a grid, symmetrized as bosons or antisymmetrized as fermions.
# Every factor space of such a state carries the same reduced state, so "the
# particle in slot 0" is not a separate object from "the particle in slot 1".

# %%
import numpy as np

from emergent_particles.grid import PacketParams, WaveFunction, gaussian_packet, inner, make_grid
from emergent_particles.manybody import (Observable, exchange_term, expectation, partial_trace,
                                         product_state, reduced_state_spread, symmetrized_product)
from emergent_particles.errors import PauliExclusionError

grid = make_grid(-10.0, 10.0, 256)
phi = gaussian_packet(grid, PacketParams(-1.0, 0.0, 1.0))
psi = gaussian_packet(grid, PacketParams(1.0, 0.0, 1.0))
print("overlap <phi|psi> =", round(abs(inner(phi, psi)), 6))

# %% [markdown]
# The product state has different reduced states in its two slots; the
# symmetrized ones do not.

# %%
for label, state in [("product", product_state([phi, psi])),
                     ("bosonic", symmetrized_product([phi, psi], "bosonic")),
                     ("fermionic", symmetrized_product([phi, psi], "fermionic"))]:
    lam = partial_trace(state, 0).eigenvalues()[:2]
    print(f"{label:9s}  spread {reduced_state_spread(state):.2e}  top eigenvalues {lam.round(6)}")

# %% [markdown]
# Antisymmetrizing a packet with itself leaves nothing.

# %%
try:
    symmetrized_product([phi, phi], "fermionic")
except PauliExclusionError as exc:
    print("Pauli exclusion:", exc)

# %% [markdown]
# Symmetric and product expectations differ by the exchange term. The small
# example below uses two orthonormal states that share grid point 0 and an
# observable that asks "are both particles at point 0?".

# %%
small = make_grid(0.0, 1.0, 8)
e = np.eye(8)
a = WaveFunction.from_vector(small, e[0] + e[1])
b = WaveFunction.from_vector(small, e[0] - e[1])
both_at_0 = Observable.product(np.outer(e[0], e[0]), np.outer(e[0], e[0]))
prod = expectation(product_state([a, b]), both_at_0)
print("exchange term         ", exchange_term(a, b, both_at_0).real)
print("bosons   - product    ", expectation(symmetrized_product([a, b], "bosonic"), both_at_0) - prod)
print("fermions - product    ", expectation(symmetrized_product([a, b], "fermionic"), both_at_0) - prod)
