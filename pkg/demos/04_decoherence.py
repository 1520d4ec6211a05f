# # Decoherence turns a cat state into a mixture of narrow packets
#
# A superposition of packets at -4 and +4 is coupled to position-monitoring
# noise of strength D. The interference lobes of rho(x, x') die at rate
# D d^2; once they are gone, rho is an even mixture of two localized states.

# %%
import numpy as np

from emergent_particles.decompose import localization_score
from emergent_particles.dynamics import (OpenSystemParams, PositionDensityMatrix, PotentialSpec,
                                         coherence_length, evolve_open, fit_decay_rate,
                                         mixture_analysis, off_diagonal_magnitude)
from emergent_particles.grid import PacketParams, gaussian_packet, make_grid, superpose

grid = make_grid(-16.0, 16.0, 256)
phi = gaussian_packet(grid, PacketParams(-4.0, 0.0, 0.5))
psi = gaussian_packet(grid, PacketParams(4.0, 0.0, 0.5))
rho0 = PositionDensityMatrix.from_wavefunction(superpose([phi, psi]))
tr = evolve_open(rho0, PotentialSpec.free(), OpenSystemParams(D=1.0), 0.001, 60)

# %%
lobes = [off_diagonal_magnitude(s, -4.0, 4.0) for s in tr.states]
print("fitted decay rate", round(fit_decay_rate(tr.times, lobes), 3), "expected", 1.0 * 8.0**2)
for t, s in list(zip(tr.times, tr.states))[::10]:
    print(f"t={t:5.3f}  coherence length {coherence_length(s):6.3f}  purity {s.purity():.4f}")

# %%
narrowness = 0.1 * grid.length
for label, state in [("initial", rho0), ("final", tr.states[-1])]:
    print(label)
    for c in mixture_analysis(state, 2):
        print(f"   weight {c.weight:.4f}  center {c.center:6.3f}  width {c.width:6.3f}  "
              f"score {localization_score(c.state, narrowness):.3f}")
