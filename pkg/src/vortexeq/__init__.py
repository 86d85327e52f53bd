"""Point vortices with point sources on closed surfaces.

Modules
-------
surface
    Sphere, flat torus and projective plane with their Green's functions.
energy
    Kirchhoff-Routh Hamiltonians, the functional ``Phi`` and hypothesis checks.
dynamics
    Hamiltonian vortex flow with conservation diagnostics.
equilibrium
    Multi-start critical point search with Hessian classification.
fibers
    Planar fiber geometry used to study vortex collapse onto sources.
combinatorics
    Maximal vortex counts, coupling feasibility and block orderings.
"""

from .energy import Background, SourceSet, VortexConfig, VortexProblem
from .surface import FlatTorus, ProjectivePlane, UnitSphere, make_surface

__all__ = [
    "Background",
    "FlatTorus",
    "ProjectivePlane",
    "SourceSet",
    "UnitSphere",
    "VortexConfig",
    "VortexProblem",
    "make_surface",
]
__version__ = "0.1.0"
