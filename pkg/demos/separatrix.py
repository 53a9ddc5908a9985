"""The Kozai saddle, its separatrix and the integrals along it."""

import numpy as np

from fourbody.separatrix import (
    gamma1_sq_integral_closed,
    gamma1_sq_integral_numeric,
    phase_shift_gamma2,
    phase_shift_psi1,
    phase_shift_psi1_numeric,
    saddle,
    shadow_separatrix,
)

L1 = 1.0
print(" Gamma2   gamma1min   A2        shadow    int closed     int numeric    dpsi      dpsi num   dgamma2")
for G2 in np.linspace(0.1, 0.7, 7):
    sd = saddle(G2, L1)
    err, *_ = shadow_separatrix(G2, L1)
    print(
        f"{G2:6.2f}  {np.degrees(sd.gamma1_min):9.3f}  {sd.A2:.3e}  {err:.1e}  "
        f"{gamma1_sq_integral_closed(G2, L1):.10f}  {gamma1_sq_integral_numeric(G2, L1):.10f}  "
        f"{phase_shift_psi1(G2, L1):.6f}  {phase_shift_psi1_numeric(G2, L1):.6f}  {phase_shift_gamma2(G2, L1):.6f}"
    )
