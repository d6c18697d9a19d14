"""Geometric treatment of dissipative dynamics.

Quantum side: GKLS generators on density matrices, their affine
realization on coherence vectors with the Hamiltonian/Gradient/Jump
split, and nonlinear unitary-plus-gradient flows on the sphere of
normalized state vectors certified as generalized contact Hamiltonian
systems.  Classical side: contact-manifold machinery (Reeb fields,
Jacobi brackets, contact Hamiltonian fields), contact Euler-Lagrange
dynamics with dissipation, and RLC circuit models.
"""

from . import algebra, contact, gkls, mechanics, purestate

__all__ = ["algebra", "contact", "gkls", "mechanics", "purestate"]
__version__ = "0.1.0"
