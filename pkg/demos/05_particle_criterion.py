# # When does a symmetrized state describe two particles?
#
# The criterion looks for a way to write the state as a symmetrized product
# of two packets that do not overlap. For separated packets exactly one such
# pair exists (up to swapping the two); for overlapping ones there is none.

# %%
import numpy as np

from emergent_particles.decompose import find_particle_decomposition, overlap_scan
from emergent_particles.grid import PacketParams, gaussian_packet, inner, make_grid, moments
from emergent_particles.manybody import symmetrized_product

grid = make_grid(-10.0, 10.0, 256)

for centers, sigma in [((-4.0, 4.0), 0.5), ((-1.5, 2.5), 0.6), ((0.0, 0.5), 1.0)]:
    phi = gaussian_packet(grid, PacketParams(centers[0], 0.0, sigma))
    psi = gaussian_packet(grid, PacketParams(centers[1], 0.0, sigma))
    for sym in ("bosonic", "fermionic"):
        state = symmetrized_product([phi, psi], sym)
        found = find_particle_decomposition(state)
        if found is None:
            print(f"{centers} {sym:9s}: no localized decomposition")
            continue
        a, b = found.packets
        print(f"{centers} {sym:9s}: packets at {moments(a)[0]:6.3f}, {moments(b)[0]:6.3f}  "
              f"overlap {found.overlap:.1e}  unique {found.unique}  "
              f"|<a|phi>|^2 {max(abs(inner(a, phi)), abs(inner(a, psi))) ** 2:.8f}")

# %% [markdown]
# The overlap along the rotation angle at the optimal phase: two dips, one
# per ordering of the same pair.

# %%
phi = gaussian_packet(grid, PacketParams(-4.0, 0.0, 0.5))
psi = gaussian_packet(grid, PacketParams(4.0, 0.0, 0.5))
scan = overlap_scan(symmetrized_product([phi, psi], "bosonic"), 64)
j = int(np.argmin(scan.values.min(axis=0)))
for theta, value in list(zip(scan.thetas, scan.values[:, j]))[::4]:
    print(f"theta={theta:5.3f}  " + "#" * int(40 * value))
