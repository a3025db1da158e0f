"""
BB84 as the identity-gate special case
======================================

With no entangling gate the protocol is plain BB84.  Eve measuring every
qubit in the z basis learns half of Alice's key and flips a quarter of
the sifted bits.
"""

import numpy as np

from entqkd.gates import IdentityGate, basis_state
from entqkd.linalg import marginal_flip_probability
from entqkd.metrics import apply_fraction, metrics_report
from entqkd.protocol import EveStrategy, enumerate_attack, transmit_round

# one round by hand: Alice sends |0;x>, Eve measures z
for branch in transmit_round(IdentityGate(1), "0", "x", EveStrategy.from_bases(["z"])):
    flip = marginal_flip_probability(0, "x", 0, branch.state)
    print(f"Eve sees {branch.e} with p={branch.probability:.2f}, Bob's x result is wrong with p={flip:.2f}")

# the full enumeration over all bits and bases
out = enumerate_attack(IdentityGate(2), EveStrategy.from_bases(["z", "z"]))
report = metrics_report(out, gate_text="identity:2", strategy_text="z,z")
print("info per bit:", round(report.info, 12), " QBER:", round(report.qber, 12), " ratio:", round(report.ratio, 12))

# per-qubit flip table [qubit, basis, bit]: zero in z, one half in x
print(np.round(out.flip_table(), 12))

# attacking only a fraction of the groups moves along a line through the origin
for xi in (1.0, 0.8, 0.5):
    r = apply_fraction(report, xi)
    print(f"xi={xi}: I={r.info_scaled:.3f} QBER={r.qber_scaled:.3f}")

# the basis states used throughout
print("|1;x> =", basis_state(1, "x"))
