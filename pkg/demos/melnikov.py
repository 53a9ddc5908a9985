"""Melnikov potentials: closed forms against direct quadrature along the separatrix."""

import numpy as np

from fourbody.melnikov import critical_times, kappa_at, melnikov_curve, melnikov_L1_numeric

L1 = 1.0
for G2 in (0.2, 0.5):
    L = melnikov_L1_numeric(G2, L1)
    print(f"Gamma2={G2}: L1* = {L.real:.12f}{L.imag:+.1e}i, kappa/2 = {0.5 * kappa_at(G2, L1):.12f}")
    for name in ("L2_23", "L5_23", "L2_12"):
        c = melnikov_curve(name, G2, L1, n=16)
        print(f"  {name}: max |closed| {np.max(np.abs(c.closed)):.4e}, relative deviation {c.relative_deviation:.1e}")
    tp, tm = critical_times(0.7, G2, L1)
    print(f"  critical times of L2_12 at gamma2=0.7: {tp:.4f}, {tm:.4f}")
