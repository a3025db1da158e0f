"""
The recursive entangler family
==============================

U*_N is built by doubling: U_{k+1} = [I (x) U_k +/- i Y (x) (P_k U_k)]/sqrt 2.
Its matrix is a sum over tensor words of I and sigma_y of one parity, and
each of Eve's single-qubit outcomes except the last is a fair coin.
"""

import numpy as np

from entqkd.gates import Parity, UStarGate, cartan_gate, u_star, u_star_parity_expansion, word_coefficients
from entqkd.metrics import bound_decomposition, mutual_information
from entqkd.optimize import first_outcome_bias, ustar_check
from entqkd.protocol import EveStrategy, enumerate_attack

# U*_2 is the Cartan gate C(0, pi/2, 0)
print("U*_2 == C(0, pi/2, 0):", np.allclose(u_star(2), cartan_gate((0, np.pi / 2, 0))))

# the words that appear in U*_3, with their projected coefficients
u3 = u_star(3, Parity.EVEN, "++")
for word in u_star_parity_expansion(3, Parity.EVEN):
    print(word, np.round(word_coefficients(u3)[word], 6))

# two qubits: a z-basis Eve gets 1/8 of a bit, and nothing if she skips one
for bases, qubits in ((["z", "z"], [0, 1]), (["z"], [0]), (["z"], [1])):
    info = mutual_information(enumerate_attack(UStarGate(2), EveStrategy.from_bases(bases, qubits)))
    print(f"U*_2, Eve measures {qubits} in {bases}: I = {info:.6f}")

# her best two-qubit measurement reaches 1/(2N) = 1/4, all from the last outcome
d = bound_decomposition(enumerate_attack(UStarGate(2), EveStrategy.from_bases(["z", "y"])))
print(f"z then y: I(A,E1)={d.info_first:.3g} h_last={d.h_last:.3f} I={d.info_total:.3f}")

# for three qubits the single outcomes are still fair coins ...
out = enumerate_attack(UStarGate(3), EveStrategy.from_bases(["x", "y", "z"]))
print("U*_3 (x, y, z): largest bias of an early outcome =", first_outcome_bias(out))
# ... but two of them together reveal a bit of Alice's key, so Eve gets 1/3 instead of 1/6
d = bound_decomposition(out)
print(f"U*_3 (x, y, z): I(A,E1)={d.info_first:.3f} I={d.info_total:.4f}")

for n in (2, 3):
    print(f"-- checks for N={n}")
    for line in ustar_check(n, draws=20):
        print(line.text())
