# # Wave packets against classical trajectories
#
# Free spreading, a packet in a harmonic well, and the quartic well where the
# centre of a wide packet stops following the classical force law.

# %%
import numpy as np

from emergent_particles.dynamics import (PotentialSpec, classical_reference, ehrenfest_residual,
                                         evolve_unitary, spreading_variance)
from emergent_particles.grid import PacketParams, gaussian_packet, make_grid

grid = make_grid(-40.0, 40.0, 512)
tr = evolve_unitary(gaussian_packet(grid, PacketParams(0.0, 0.0, 1.0)), PotentialSpec.free(), 0.01, 400, 50)
for t, v in zip(tr.times, tr.var_x):
    print(f"t={t:4.1f}  var_x={v:8.5f}  closed form={spreading_variance(t, 1.0):8.5f}")

# %%
grid = make_grid(-10.0, 10.0, 256)
pot = PotentialSpec.harmonic(1.0)
wf = gaussian_packet(grid, PacketParams(3.0, 0.0, 0.5))
tr = evolve_unitary(wf, pot, 0.001, 3142, 314)
cl = classical_reference(pot, 3.0, 0.0, 0.001, 3142, 314)
for t, xq, xc, v in zip(tr.times, tr.mean_x, cl.mean_x, tr.var_x):
    print(f"t={t:5.3f}  <x>={xq:8.5f}  classical={xc:8.5f}  var_x={v:6.4f}")

# %% [markdown]
# In a quartic well the mean force <F(x)> still drives <x> exactly, but
# F(<x>) does not, and the mismatch grows with the packet width.

# %%
grid = make_grid(-10.0, 10.0, 512)
pot = PotentialSpec.quartic(0.1, mass=10.0)
for sigma in (0.2, 0.5, 1.0):
    tr = evolve_unitary(gaussian_packet(grid, PacketParams(1.5, 0.0, sigma)), pot, 0.002, 500)
    mean = ehrenfest_residual(tr, pot, "mean").max()
    classical = ehrenfest_residual(tr, pot, "classical")
    print(f"sigma={sigma:3.1f}  mean-force residual {mean:.1e}  "
          f"classical-law residual {classical.mean():.4f}")
