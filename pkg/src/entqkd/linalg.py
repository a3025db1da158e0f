"""Dense state-vector algebra for a handful of qubits.

States are 1-D complex arrays of length ``2**n`` and operators are
``2**n x 2**n`` complex arrays.  Qubit 0 is the leftmost tensor factor,
i.e. the most significant bit of a computational-basis index.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple

import numpy as np

ATOL = 1e-12

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class MeasurementBranch(NamedTuple):
    probability: float
    outcome: int
    post_state: np.ndarray


def num_qubits(x: np.ndarray) -> int:
    """Number of qubits spanned by a state vector or square operator."""
    dim = x.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    if x.ndim == 2 and x.shape[1] != dim:
        raise ValueError(f"operator must be square, got shape {x.shape}")
    return n


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of the operands, leftmost factor first."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol))


def apply(u: np.ndarray, s: np.ndarray) -> np.ndarray:
    if u.shape[-1] != s.shape[0]:
        raise ValueError(f"operator of dim {u.shape[-1]} cannot act on state of dim {s.shape[0]}")
    return u @ s


def apply_on_qubit(u: np.ndarray, q: int, s: np.ndarray) -> np.ndarray:
    """Apply the single-qubit gate ``u`` to qubit ``q`` of ``s``."""
    n = num_qubits(s)
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    if u.shape != (2, 2):
        raise ValueError("apply_on_qubit expects a 2x2 operator")
    t = s.reshape((1 << q, 2, 1 << (n - q - 1)))
    return np.einsum("ij,ajb->aib", u, t).reshape(-1)


def measure_qubit_z(q: int, s: np.ndarray) -> tuple[MeasurementBranch, MeasurementBranch]:
    """Projective z measurement of qubit ``q``.

    Both branches are always returned.  A branch that cannot occur has
    probability exactly 0 and carries the placeholder ``|0...0>``.
    """
    n = num_qubits(s)
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n}-qubit state")
    t = s.reshape((1 << q, 2, 1 << (n - q - 1)))
    weights = np.sum(np.abs(t) ** 2, axis=(0, 2))
    weights = weights / weights.sum()
    branches = []
    for bit in (0, 1):
        p = float(weights[bit])
        post = np.zeros_like(t)
        if p > 0.0:
            post[:, bit, :] = t[:, bit, :] / np.sqrt(p)
            post = post.reshape(-1)
        else:
            post = post.reshape(-1)
            post[0] = 1.0
        branches.append(MeasurementBranch(p, bit, post))
    return branches[0], branches[1]


def marginal_flip_probability(q: int, basis: str, reference_bit: int, s: np.ndarray) -> float:
    """Probability that measuring qubit ``q`` in ``basis`` ('z' or 'x') does not give ``reference_bit``."""
    if basis not in ("z", "x"):
        raise ValueError(f"basis must be 'z' or 'x', got {basis!r}")
    if basis == "x":
        s = apply_on_qubit(_HADAMARD, q, s)
    zero, one = measure_qubit_z(q, s)
    p = one.probability if reference_bit == 0 else zero.probability
    return min(max(p, 0.0), 1.0)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    """True when ``u == exp(i phi) v`` for some global phase (vectors or matrices)."""
    u = np.asarray(u, dtype=complex).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if u.shape != v.shape:
        return False
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) < atol:
        return bool(np.allclose(u, 0, atol=atol))
    phase = u[k] / v[k]
    if abs(abs(phase) - 1.0) > atol * 10:
        return False
    return bool(np.allclose(u, phase * v, rtol=0, atol=atol))


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state on ``n`` qubits."""
    z = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return z / np.linalg.norm(z)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
