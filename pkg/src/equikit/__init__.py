"""Toolkit for synthesizing and training group-equivariant quantum channels.

The package bundles:

* dense complex linear algebra and Pauli operator bases (:mod:`equikit.linalg`),
* group representations, commutants and isotypic decompositions
  (:mod:`equikit.grouprep`),
* superoperator conversions between transfer-matrix, Choi, Kraus and
  Stinespring forms (:mod:`equikit.channels`),
* three constructions of equivariant map spaces, nullspace / twirling /
  Choi-block, plus parameter counting (:mod:`equikit.solvers`),
* the SU(2)-specific pooling family with its CPTP feasible region
  (:mod:`equikit.su2`),
* bond-alternating Heisenberg ground states and labeled datasets
  (:mod:`equikit.spin`),
* an equivariant quantum convolutional classifier and its training loop
  (:mod:`equikit.models`, :mod:`equikit.train`),
* a FastAPI service and a thin CLI client (:mod:`equikit.service`,
  :mod:`equikit.cli`).
"""

__version__ = "0.1.0"
