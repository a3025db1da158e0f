"""
Key rates after error correction
================================

A lower information/QBER slope leaves more key after error correction.
delta is the unknown factor by which the entangled scheme changes the
physical QBER.
"""

import numpy as np

from entqkd.keyrate import (SLOPE, binary_entropy, delta_breakeven, gain_fraction, pns_advantage_bound,
                            rate_figure_dataset, relative_key_rate)

q = 0.06
print(f"H_bin({q}) = {binary_entropy(q):.6f}")
print(f"BB84 rate:            {relative_key_rate(q):.4f}")
print(f"entangled, delta=1:   {relative_key_rate(q, 'enhanced2q', 1.0):.4f}")
print(f"ideal s=0, delta=1:   {relative_key_rate(q, 'ideal_s0', 1.0):.4f}")
print(f"share of the s=0 gain: {gain_fraction(q):.3f}")
print(f"BB84 recovered at delta = {delta_breakeven(q, SLOPE):.4f} (s=0: {delta_breakeven(q, 0.0):.4f})")

ds = rate_figure_dataset(q, deltas=np.linspace(0.5, 2.0, 7))
print(" delta  r_enhanced  r_ideal  r_bb84")
for row in ds.data:
    print("  ".join(f"{v:8.4f}" for v in row))

# multi-photon pulses: all N qubits of a group must leak
for n in (1, 2, 4):
    print(f"epsilon=0.1, N={n}: {pns_advantage_bound(0.1, n):g}")
