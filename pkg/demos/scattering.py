"""Scattering map jumps, sign windows and the twist determinant."""

import numpy as np

from fourbody.scattering import ScatteringConstants, find_jump_windows, jumps_hat, twist_determinant_sign_profile

c = ScatteringConstants(delta1=0.5, delta3=0.2)
G2 = 0.5
grid = 2 * np.pi * np.arange(64) / 64
P, G = np.meshgrid(grid, grid, indexing="ij")
for branch in ("+", "-"):
    hj = jumps_hat(P, G, G2, branch, c)
    print(f"branch {branch}: S1 in [{hj.S1.min():.3f}, {hj.S1.max():.3f}], S3 in [{hj.S3.min():.3f}, {hj.S3.max():.3f}]")
    res = find_jump_windows(G2, branch, c)
    for w in res.windows:
        print(f"  {w.pattern} signs {w.signs}: psi1 {w.psi1[0]:.3f}..{w.psi1[1]:.3f}, gamma3 {w.gamma3[0]:.3f}..{w.gamma3[1]:.3f}, measure {w.measure:.3f}")

g, det = twist_determinant_sign_profile(1.0, 0.5, 0.6, 0.2, n=9)
for x, d in zip(g, det):
    print(f"Gamma2 = {x:.4f}: leading twist determinant {d:+.4e}")
