"""Double averages of the inner-pair Legendre terms against their closed forms."""

from fourbody.frames import convert, derive_masses
from fourbody.hamiltonians import (
    average_2angles_adaptive,
    closed_form_inputs,
    f_oct12_closed,
    f_quad12_closed,
    pair_integrand,
)
from fourbody.simulate import OrbitElements, hierarchical_state

masses = derive_masses(1.0, 1e-3, 1e-3, 1e-3)
for e1 in (0.1, 0.4, 0.7):
    orbits = [OrbitElements(1.0, e1, 0.9, 0.0, 1.2), OrbitElements(12.0, 0.3, 0.2, 1.0, 0.5), OrbitElements(500.0, 0.1, 0.3, 2.0, 1.0)]
    dep = convert(hierarchical_state(masses, orbits), "deprit", masses)
    x = closed_form_inputs(dep, masses)
    q2, n2 = average_2angles_adaptive(pair_integrand(dep, masses, 2))
    q3, n3 = average_2angles_adaptive(pair_integrand(dep, masses, 3))
    c2 = f_quad12_closed(x["e1"], x["e2"], x["gamma1"], x["i12"], x["a1"], x["a2"])
    c3 = f_oct12_closed(x["e1"], x["e2"], x["gamma1"], x["gamma2"], x["i12"], x["a1"], x["a2"])
    print(f"e1={e1:.1f}  P2 {q2: .12e} vs {c2: .12e} ({n2} nodes)   P3 {q3: .12e} vs {c3: .12e} ({n3} nodes)")
