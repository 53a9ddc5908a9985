"""Hierarchical four-body state in Jacobi, Deprit and localized variables."""

import numpy as np

from fourbody.frames import (
    cartesian_to_jacobi,
    deprit_to_tilde,
    derive_masses,
    inclinations,
    jacobi_to_deprit,
    verify_deprit_symplectic,
)
from fourbody.simulate import OrbitElements, hierarchical_state

masses = derive_masses(1.0, 1e-3, 2e-3, 3e-3)
orbits = [
    OrbitElements(1.0, 0.2, 0.6, 0.3, 1.0, 0.0),
    OrbitElements(20.0, 0.1, 0.9, 2.0, 0.4, 1.0),
    OrbitElements(400.0, 0.05, 0.2, 4.0, 2.0, 2.0),
]
cart = hierarchical_state(masses, orbits)
jac = cartesian_to_jacobi(cart, masses)
dep = jacobi_to_deprit(jac, masses)

np.set_printoptions(precision=6, suppress=False)
print("L  =", dep.L)
print("G  =", dep.G)
print("Psi=", dep.Psi)
i12, i23 = inclinations(dep)
print(f"i12 = {np.degrees(i12):.3f} deg, i23 = {np.degrees(i23):.3f} deg")

rep = verify_deprit_symplectic(jac, masses)
print(f"bracket table error {rep.max_error:.2e}, node margins {rep.node_margins}")

# localize around the current Psi1 and Psi2 - G3
L2 = dep.L[1]
t = deprit_to_tilde(dep, dep.Psi[0] / L2, None, (dep.Psi[1] - dep.G[2]) / L2)
print(f"Gamma2~ = {t.Gamma2:.6f}, Psi1~ = {t.Psi1:.1e}, Gamma3~ = {t.Gamma3:.1e}")
