"""Lie-Poisson bracket calculus for ideal incompressible flow on the flat 2-torus.

Submodules
----------
fields        grids, fields, spectral calculus, interpolation, snapshots
hodge         Helmholtz-Hodge decomposition and the Leray projection
observables   advection, the operator B, observables and their differentials
bracket       the Lie-Poisson bracket, Jacobi cycles, normalisation scales
group         volume-preserving flow maps, inversion, the reduction map
dynamics      Eulerian and Lagrangian Euler flows, tangent and adjoint models
oracle        brute-force Galerkin reference on a tiny mode set
checks        verification suites and reports
cli           command-line front end
"""

__version__ = "0.1.0"

from .fields import DivFreeField, Grid, ScalarField, VectorField  # noqa: E402,F401
from .observables import Observable  # noqa: E402,F401
