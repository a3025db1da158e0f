"""
Choosing the gate: a min-max search
===================================

Alice and Bob pick Cartan parameters c to minimize Eve's best ratio,
where Eve may intercept one qubit or both.  The default search takes a
few minutes; pass --quick for a short run.
"""

import sys

from entqkd.gates import C_STAR
from entqkd.optimize import OUTER_SEARCH, OptimizationConfig, defence_value, optimize_gate

quick = "--quick" in sys.argv

# reference points
print("c = 0 (BB84):", round(defence_value((0, 0, 0), OptimizationConfig(restarts=8)).value, 6))
print("c = c*      :", round(defence_value(C_STAR).value, 6))

outer = OptimizationConfig(max_iterations=20, restarts=2, tolerance_f=1e-6, tolerance_x=1e-4) if quick else OUTER_SEARCH


def progress(it, value):
    if it % 10 == 0:
        print(f"  iteration {it:3d}: best {value:.6f}")


found = optimize_gate(outer, trace=progress)
print("best gate:", [round(v, 5) for v in found.c.as_tuple()])
print(f"Eve's best ratio against it: {found.value:.6f} (pattern {found.inner.intercepted})")
print("outer evaluations:", found.outer_evaluations)
