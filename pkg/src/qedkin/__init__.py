"""Covariant mean-field QED kinetics: Wigner channels on space-like hyperplanes.

Modules
-------
clifford  Dirac matrices, channel decomposition and the identity table.
geometry  Hyperplanes, longitudinal/transverse splits, boosts.
fields    Prescribed and tabulated mean fields.
wigner    Lattice Wigner transform, phase-space grids, snapshots.
qkin      Sixteen-channel kinetic solver and diagnostics.
vlasov    Quasi-classical distributions, Vlasov solvers, currents.
cli       Batch scenario runner.
"""

__version__ = "0.1.0"
