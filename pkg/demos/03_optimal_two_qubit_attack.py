"""
Eve against the optimal two-qubit gate
======================================

For C(pi/32, 3pi/8, pi/32) Eve's best information/QBER ratio drops from
BB84's 2 to about 0.5965.  Grid sweeps give the spread of (QBER, info)
pairs for fixed z-basis attacks over all Cartan gates and for all attacks
on the optimal gate.
"""

import math

from entqkd.gates import C_STAR, CartanGate, IdentityGate
from entqkd.metrics import metrics_report
from entqkd.optimize import OptimizationConfig, optimize_eve, sweep_cartan, sweep_eve
from entqkd.protocol import EveStrategy, enumerate_attack

config = OptimizationConfig(restarts=16)

print("identity gate slope:", round(optimize_eve(IdentityGate(2), config=config).value, 6))
best = optimize_eve(CartanGate(C_STAR), config=config)
print(f"C(c*): slope {best.value:.6f}, I={best.report.info:.4f}, QBER={best.report.qber:.4f}")
print("angles (beta, gamma) per qubit:", best.angles.round(4).tolist())

# the closed-form optimum
r = metrics_report(enumerate_attack(CartanGate(C_STAR), EveStrategy({0: (math.pi / 8, 0), 1: (math.pi / 2, math.pi / 2)})))
print(f"(pi/8, 0, pi/2, pi/2): I={r.info:.6f} QBER={r.qber:.6f} ratio={r.ratio:.6f}")

# intercepting a single qubit barely helps her
one = optimize_eve(CartanGate(C_STAR), (0,), config, objective="info")
print(f"one qubit: max I={one.report.info:.4f}")

# z-basis Eve over a coarse grid of Cartan gates
grid = sweep_cartan(9, "both_z")
print(f"{len(grid)} gates, info in [{grid['info'].min():.3f}, {grid['info'].max():.3f}]")

# every basis pair Eve could pick against C(c*)
both = sweep_eve(CartanGate(C_STAR), 11, "both")
print(f"{len(both)} attacks, info in [{both['info'].min():.4f}, {both['info'].max():.4f}]")
with open("sweep_eve_cstar.csv", "w", newline="") as fh:
    both.write_csv(fh)
print("wrote sweep_eve_cstar.csv")
