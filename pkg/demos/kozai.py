"""Kozai cycle of a hierarchical triple: secular flow against the full problem.

The direct run covers one Kozai period and takes about two minutes; pass
``--quick`` for a tenth of a period.
"""

import sys

import numpy as np

from fourbody.simulate import compare_direct_secular

periods = 0.1 if "--quick" in sys.argv else 1.0
rep = compare_direct_secular(periods=periods)
print(f"Kozai period {rep.kozai_period:.1f} (inner period {rep.setup['P1']:.3f})")
print(f"e1 deviation {100 * rep.e1_deviation:.2f}%, i12 deviation {100 * rep.i12_deviation:.2f}%")
print(f"energy {rep.monitors['rel_energy_error']:.1e}, angular momentum {rep.monitors['rel_angular_momentum_error']:.1e}")
for k in np.linspace(0, len(rep.t) - 1, 9).astype(int):
    print(f"t={rep.t[k]:9.1f}  e1 {rep.direct['e1'][k]:.4f} / {rep.secular['e1'][k]:.4f}  i12 {np.degrees(rep.direct['i12'][k]):7.3f} / {np.degrees(rep.secular['i12'][k]):7.3f}")
