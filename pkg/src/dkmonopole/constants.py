"""Shared conventions: component ordering, metric, and numerical tolerances.

Cartesian column order is (Phi0, Phi1, Phi2, Phi3; Phi01, Phi02, Phi03;
Phi23, Phi31, Phi12).  The cyclic column order follows the 10 radial slots
f1..f10, whose angular factors are D_{kappa + offset} with the offsets in
``SIGMA_OFFSETS``.
"""

import math

import numpy as np

CARTESIAN_LABELS = (
    "Phi0", "Phi1", "Phi2", "Phi3",
    "Phi01", "Phi02", "Phi03",
    "Phi23", "Phi31", "Phi12",
)
CYCLIC_LABELS = tuple(f"f{i}" for i in range(1, 11))

# antisymmetric pairs in the order they occupy rows 5..10 of the column
BIVECTOR_PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))

# sigma - kappa for the slot f_{i+1}
SIGMA_OFFSETS = (0, -1, 0, 1, -1, 0, 1, -1, 0, 1)

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
ETA.setflags(write=False)

# cyclic <-> Cartesian mixing constant; the sign is fixed by the tabulated
# cyclic beta^1, beta^2 and the Psi_1, Psi_2 relations
W = 1.0 / math.sqrt(2.0)

POLE_GUARD = 1e-6

ALGEBRA_TOL = 1e-12
LORENTZ_TOL = 1e-10
FD_TOL = 1e-6
RECURSION_TOL = 1e-8
