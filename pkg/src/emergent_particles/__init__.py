"""Identical particles, decoherence and the emergence of localized particles.

Modules
-------
grid        uniform periodic grids, Gaussian packets, moments, localization
manybody    (anti)symmetrized states, partial traces, observables, EPR states
decompose   Schmidt decompositions and the localized-particle criterion
dynamics    split-step and open-system evolution, Ehrenfest diagnostics
stats       FD/BE/MB counting and region-detection tables
classical   permutation-symmetrized classical phase-space ensembles
scenarios   configurable pipelines behind the ``emergent-particles`` CLI
"""

__version__ = "0.1.0"
