# # Spin singlet of two separated packets
#
# The fully antisymmetrized state and the bare product form give the same
# numbers for anything that only asks where the particles are and what their
# spins do there. A hopping observable that moves amplitude between the
# packets tells them apart.

# %%
import numpy as np

from emergent_particles.grid import PacketParams, gaussian_packet, make_grid
from emergent_particles.manybody import Observable, epr_state, expectation, spin_correlation

grid = make_grid(-8.0, 8.0, 128)
phi = gaussian_packet(grid, PacketParams(-4.0, 0.0, 0.5))
psi = gaussian_packet(grid, PacketParams(4.0, 0.0, 0.5))
full = epr_state(phi, psi, "full")
prag = epr_state(phi, psi, "pragmatic")

# %%
left, right = (-8.0, 0.0), (0.0, 8.0)
print(" theta    full     pragmatic  -cos")
for theta in np.linspace(0.0, np.pi, 5):
    cf = spin_correlation(full, left, 0.0, right, theta).correlator
    cp = spin_correlation(prag, left, 0.0, right, theta).correlator
    print(f"{theta:6.3f}  {cf:8.5f}  {cp:8.5f}  {-np.cos(theta):8.5f}")

# %%
hop = np.outer(phi.vector, psi.vector.conj())
hop = np.kron(hop + hop.conj().T, np.eye(2))
A = Observable.product(hop, hop)
print("hopping observable: full", round(expectation(full, A), 6),
      " pragmatic", round(expectation(prag, A), 6))
