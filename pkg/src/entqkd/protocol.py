"""Exact enumeration of one protocol round under an intercept-resend attack.

Alice prepares ``|a_1;alpha_1> ... |a_N;alpha_N>``, applies the public gate
``U`` and sends the qubits one at a time.  On each intercepted qubit ``q``
Eve applies ``K_q = R_y(beta_q) R_z(gamma_q)``, measures z, prepares the
z eigenstate she saw and undoes ``K_q`` before forwarding.  Bob applies
``U^dag`` and measures every qubit in a random basis; only positions
whose basis matches Alice's survive sifting.

Eve's action on qubit ``q`` with outcome ``e`` is the rank-one projector
``K_q^dag |e><e| K_q``.  :class:`AttackModel` uses this to evaluate all
``(alpha, a, e)`` cells at once; :func:`transmit_round` walks the branches
one measurement at a time and serves as the independent reference route.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from . import gates
from .gates import GateSpec, eve_premeasure_gate, gate_num_qubits, product_state, resolve
from .linalg import apply, apply_on_qubit, marginal_flip_probability, measure_qubit_z, num_qubits


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------

@dataclass
class EveStrategy:
    """Which qubits Eve intercepts, her rotation angles for each, and the
    fraction ``xi`` of groups she attacks."""

    angles: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    xi: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
        clean = {}
        for q, pair in sorted(self.angles.items()):
            q = int(q)
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            beta, gamma = pair
            clean[q] = (float(beta), float(gamma))
        self.angles = clean

    @property
    def intercepted(self) -> tuple[int, ...]:
        return tuple(self.angles)

    def angle_array(self) -> np.ndarray:
        """Angles as an ``(|S|, 2)`` array in ascending qubit order."""
        return np.array([self.angles[q] for q in self.intercepted], dtype=float).reshape(-1, 2)

    @classmethod
    def from_bases(cls, bases, intercepted=None, xi: float = 1.0) -> EveStrategy:
        """Strategy measuring each intercepted qubit in a named basis (z, x or y)."""
        bases = list(bases)
        if intercepted is None:
            intercepted = range(len(bases))
        intercepted = list(intercepted)
        if len(intercepted) != len(bases):
            raise ValueError("one basis per intercepted qubit is required")
        return cls({q: gates.NAMED_BASES[b] for q, b in zip(intercepted, bases)}, xi)

    @classmethod
    def from_angles(cls, intercepted, flat_angles, xi: float = 1.0) -> EveStrategy:
        flat = np.asarray(flat_angles, dtype=float).reshape(-1, 2)
        intercepted = sorted(intercepted)
        if len(intercepted) != len(flat):
            raise ValueError("one (beta, gamma) pair per intercepted qubit is required")
        return cls({q: (b, g) for q, (b, g) in zip(intercepted, flat)}, xi)

    def check(self, n: int) -> None:
        bad = [q for q in self.angles if q >= n]
        if bad:
            raise ValueError(f"intercepted qubits {bad} do not exist in a {n}-qubit group")

    def to_text(self) -> str:
        if not self.angles:
            return "none"
        return ",".join(
            f"{q}:{gates.format_angle(b)}:{gates.format_angle(g)}" for q, (b, g) in self.angles.items()
        )


def parse_strategy(text: str, xi: float = 1.0) -> EveStrategy:
    """Inverse of :meth:`EveStrategy.to_text`; also accepts ``idx:basis`` tokens."""
    text = text.strip()
    if text in ("", "none"):
        return EveStrategy({}, xi)
    angles = {}
    for token in text.split(","):
        parts = token.strip().split(":")
        try:
            q = int(parts[0])
        except ValueError:
            raise ValueError(f"bad strategy token {token!r}") from None
        if q in angles:
            raise ValueError(f"qubit {q} listed twice")
        try:
            if len(parts) == 2 and parts[1].lower() in gates.NAMED_BASES:
                angles[q] = gates.NAMED_BASES[parts[1].lower()]
            elif len(parts) == 3:
                angles[q] = (gates.parse_angle(parts[1]), gates.parse_angle(parts[2]))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(f"bad strategy token {token!r}") from None
    return EveStrategy(angles, xi)


@dataclass(frozen=True)
class RandomVariableSplit:
    """Eve's outcomes split into the first measurements and the last one."""

    first: tuple[int, ...]
    last: int | None

    @classmethod
    def from_strategy(cls, strategy: EveStrategy) -> RandomVariableSplit:
        s = strategy.intercepted
        if not s:
            return cls((), None)
        return cls(tuple(s[:-1]), s[-1])

    def check(self, strategy: EveStrategy) -> None:
        if self != RandomVariableSplit.from_strategy(strategy):
            raise ValueError("split does not follow Eve's ascending measurement order")


# ---------------------------------------------------------------------------
# index helpers
# ---------------------------------------------------------------------------

def bits_of(index: int, width: int) -> tuple[int, ...]:
    """Bits of ``index``, most significant (qubit 0) first."""
    return tuple((index >> (width - 1 - k)) & 1 for k in range(width))


def bitstring(index: int, width: int) -> str:
    return "".join(map(str, bits_of(index, width)))


def basis_string(index: int, width: int) -> str:
    return "".join("zx"[b] for b in bits_of(index, width))


def _bit_table(n: int) -> np.ndarray:
    """``table[i, k]`` is bit ``k`` (qubit order) of integer ``i``."""
    idx = np.arange(1 << n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.int8)


# ---------------------------------------------------------------------------
# reference route: one branch at a time
# ---------------------------------------------------------------------------

class Branch(NamedTuple):
    probability: float
    e: str
    state: np.ndarray


def transmit_round(gate: GateSpec | np.ndarray, a: str, alpha: str, strategy: EveStrategy) -> list[Branch]:
    """Every Eve outcome branch for one group, with the state Bob receives.

    States are returned before Bob's ``U^dag``.
    """
    u = resolve(gate)
    n = num_qubits(u)
    if len(a) != n or len(alpha) != n:
        raise ValueError(f"group of {n} qubits needs {n} bits and {n} bases")
    strategy.check(n)
    psi = apply(u, product_state(a, alpha))
    branches = [Branch(1.0, "", psi)]
    for q in strategy.intercepted:
        k = eve_premeasure_gate(*strategy.angles[q])
        k_dag = k.conj().T
        grown = []
        for p, e, s in branches:
            for outcome in measure_qubit_z(q, apply_on_qubit(k, q, s)):
                if outcome.probability > 0.0:
                    resent = apply_on_qubit(k_dag, q, outcome.post_state)
                    grown.append(Branch(p * outcome.probability, e + str(outcome.outcome), resent))
        branches = grown
    return branches


# ---------------------------------------------------------------------------
# outcome tables
# ---------------------------------------------------------------------------

@dataclass
class AttackOutcome:
    """Exact statistics of an attack at full strength (``xi`` ignored).

    ``cond[alpha, a, e]`` is ``p(e | a, alpha)``; ``flips[alpha, a, j]`` is
    the probability that Bob, measuring qubit ``j`` in basis ``alpha_j``,
    gets ``not a_j``.  Indices are integers whose most significant bit
    belongs to qubit 0; for ``alpha`` a 0 bit means z and 1 means x.
    ``e`` runs over Eve's outcomes in ascending intercepted-qubit order.
    """

    n: int
    intercepted: tuple[int, ...]
    cond: np.ndarray
    flips: np.ndarray

    @property
    def joint(self) -> np.ndarray:
        """``p(a, e | alpha)`` with Alice's bits uniform."""
        return self.cond / (1 << self.n)

    def flip_table(self) -> np.ndarray:
        """``table[j, alpha_j, a_j]`` = ``p(B_j != a_j | a_j; alpha_j)``, other qubits averaged."""
        n = self.n
        bits = _bit_table(n)
        table = np.zeros((n, 2, 2))
        for j in range(n):
            for al in (0, 1):
                for bit in (0, 1):
                    rows = bits[:, j] == al
                    cols = bits[:, j] == bit
                    table[j, al, bit] = self.flips[np.ix_(rows, cols, [j])].mean()
        return table

    def to_json(self) -> str:
        records = []
        m = len(self.intercepted)
        for x, a, e in itertools.product(range(1 << self.n), range(1 << self.n), range(1 << m)):
            records.append({
                "alpha": basis_string(x, self.n),
                "a": bitstring(a, self.n),
                "e": bitstring(e, m) if m else "",
                "p": float(f"{self.cond[x, a, e]:.17g}"),
            })
        flips = [
            {"alpha": basis_string(x, self.n), "a": bitstring(a, self.n), "qubit": j,
             "p_flip": float(f"{self.flips[x, a, j]:.17g}")}
            for x, a, j in itertools.product(range(1 << self.n), range(1 << self.n), range(self.n))
        ]
        return json.dumps({"n": self.n, "intercepted": list(self.intercepted),
                           "cond": records, "flips": flips}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> AttackOutcome:
        data = json.loads(text)
        n, inter = data["n"], tuple(data["intercepted"])
        m = len(inter)
        cond = np.zeros((1 << n, 1 << n, 1 << m))
        for r in data["cond"]:
            x = int(r["alpha"].replace("z", "0").replace("x", "1"), 2)
            e = int(r["e"], 2) if r["e"] else 0
            cond[x, int(r["a"], 2), e] = r["p"]
        flips = np.zeros((1 << n, 1 << n, n))
        for r in data["flips"]:
            x = int(r["alpha"].replace("z", "0").replace("x", "1"), 2)
            flips[x, int(r["a"], 2), r["qubit"]] = r["p_flip"]
        return cls(n, inter, cond, flips)


# ---------------------------------------------------------------------------
# fast route
# ---------------------------------------------------------------------------

def _basis_change(n: int) -> np.ndarray:
    """``out[alpha]`` has columns ``|a; alpha>`` for every bit string ``a``."""
    bits = _bit_table(n)
    out = np.empty((1 << n, 1 << n, 1 << n), dtype=complex)
    for x in range(1 << n):
        out[x] = gates.tensor(*(gates.HADAMARD if b else gates.I1 for b in bits[x]))
    return out


class AttackModel:
    """Precomputed pieces for evaluating many Eve angle sets on one gate.

    ``tables(angles)`` accepts angles of shape ``(batch, |S|, 2)`` (or a
    single ``(|S|, 2)`` set) and returns ``(cond, flips)`` with a leading
    batch axis.
    """

    def __init__(self, gate: GateSpec | np.ndarray, intercepted):
        self.u = resolve(gate)
        self.n = num_qubits(self.u)
        self.intercepted = tuple(sorted(int(q) for q in intercepted))
        if any(q >= self.n for q in self.intercepted):
            raise ValueError(f"intercepted qubits {self.intercepted} exceed group size {self.n}")
        if len(set(self.intercepted)) != len(self.intercepted):
            raise ValueError("duplicate intercepted qubit")
        # v[alpha] = U B_alpha, so column a is the transmitted state
        self.v = np.einsum("ij,xjk->xik", self.u, _basis_change(self.n))
        bits = _bit_table(self.n)
        # mask[j, b, a] = 1 when Bob's bit b_j differs from Alice's a_j
        self.mask = (bits.T[:, :, None] != bits.T[:, None, :]).astype(float)

    @property
    def num_outcomes(self) -> int:
        return 1 << len(self.intercepted)

    def bras_for(self, angles: np.ndarray) -> np.ndarray:
        """Rows of ``K = R_y(beta) R_z(gamma)``: ``bras[b, s, e] = <e| K`` for intercepted slot ``s``."""
        beta, gamma = angles[..., 0], angles[..., 1]
        cb, sb = np.cos(beta / 2), np.sin(beta / 2)
        ez = np.exp(-0.5j * gamma)
        k = np.empty(angles.shape[:2] + (2, 2), dtype=complex)
        k[..., 0, 0] = cb * ez
        k[..., 0, 1] = -sb * ez.conj()
        k[..., 1, 0] = sb * ez
        k[..., 1, 1] = cb * ez.conj()
        return k

    def tables(self, angles) -> tuple[np.ndarray, np.ndarray]:
        angles = np.asarray(angles, dtype=float)
        single = angles.ndim == 2
        if single:
            angles = angles[None]
        if angles.shape[1:] != (len(self.intercepted), 2):
            raise ValueError(f"expected angles of shape (batch, {len(self.intercepted)}, 2), got {angles.shape}")
        cond, flips = _tables(self.v[None], self.bras_for(angles), self.n, self.intercepted, self.mask)
        if single:
            return cond[0], flips[0]
        return cond, flips

    def outcome(self, angles) -> AttackOutcome:
        cond, flips = self.tables(np.asarray(angles, dtype=float).reshape(-1, 2))
        return AttackOutcome(self.n, self.intercepted, cond, flips)


def _tables(v: np.ndarray, bras: np.ndarray, n: int, intercepted, mask: np.ndarray):
    """Core contraction shared by :class:`AttackModel` and :func:`batch_gate_tables`.

    ``v[g, alpha]`` is ``U B_alpha`` (leading axis broadcast against the batch
    of Eve strategies in ``bras``).  With ``Phi_e`` the embedding of Eve's
    resent product state for outcome ``e`` next to the untouched qubits,
    ``A_e = Phi_e^dag V`` gives ``p(e | a) = ||A_e |a>||^2`` and Bob's
    amplitudes ``W_e = A_e^dag A_e``.
    """
    batch = max(v.shape[0], bras.shape[0])
    dim = 1 << n
    t = np.broadcast_to(v, (batch,) + v.shape[1:]).reshape((batch, v.shape[1]) + (2,) * n + (dim,))
    for slot, q in enumerate(intercepted):
        ax = 2 + q
        t = np.moveaxis(t, ax, -1)
        # contract row index j of qubit q with <e|K
        kt = bras[:, slot].swapaxes(-1, -2).reshape((bras.shape[0],) + (1,) * (t.ndim - 3) + (2, 2))
        t = np.moveaxis(t @ kt, -1, ax)
        t = np.ascontiguousarray(t)
    rest = [q for q in range(n) if q not in intercepted]
    order = [2 + q for q in intercepted] + [2 + q for q in rest]
    t = t.transpose([0, 1] + order + [t.ndim - 1])
    n_e = 1 << len(intercepted)
    a_mat = t.reshape(batch, v.shape[1], n_e, dim // n_e, dim)  # [b, alpha, e, rest, a]
    weights = np.abs(a_mat) ** 2
    cond = weights.sum(axis=3).transpose(0, 1, 3, 2)  # [b, alpha, a, e]
    if a_mat.shape[3] == 1:
        # every qubit intercepted: W_e is rank one and |W_e|^2 factorizes
        p = weights[:, :, :, 0, :]
        prob = p.swapaxes(-1, -2) @ p
    else:
        w = a_mat.conj().swapaxes(-1, -2) @ a_mat  # [b, alpha, e, bob, a]
        prob = (np.abs(w) ** 2).sum(axis=2)
    flips = np.einsum("jra,bxra->bxaj", mask, prob, optimize=True)
    return cond, flips


def enumerate_attack(gate: GateSpec | np.ndarray, strategy: EveStrategy) -> AttackOutcome:
    """Exact ``p(e | a, alpha)`` and Bob's per-qubit flip probabilities for all ``(alpha, a)``."""
    n = gate_num_qubits(gate)
    strategy.check(n)
    model = AttackModel(gate, strategy.intercepted)
    return model.outcome(strategy.angle_array())


def enumerate_attack_reference(gate: GateSpec | np.ndarray, strategy: EveStrategy) -> AttackOutcome:
    """Same tables as :func:`enumerate_attack`, built from :func:`transmit_round` branches."""
    u = resolve(gate)
    n = num_qubits(u)
    m = len(strategy.intercepted)
    u_dag = u.conj().T
    cond = np.zeros((1 << n, 1 << n, 1 << m))
    flips = np.zeros((1 << n, 1 << n, n))
    for x in range(1 << n):
        alpha = basis_string(x, n)
        for ai in range(1 << n):
            a = bitstring(ai, n)
            for br in transmit_round(u, a, alpha, strategy):
                e = int(br.e, 2) if br.e else 0
                cond[x, ai, e] += br.probability
                bob = u_dag @ br.state
                for j in range(n):
                    flips[x, ai, j] += br.probability * marginal_flip_probability(j, alpha[j], int(a[j]), bob)
    return AttackOutcome(n, strategy.intercepted, cond, flips)


def bb84_reduction_check(strategy: EveStrategy, n: int | None = None):
    """Metrics for ``strategy`` when the public gate is the identity (plain BB84)."""
    from .metrics import metrics_report

    if n is None:
        n = max(strategy.intercepted, default=0) + 1
    gate = gates.IdentityGate(n)
    return metrics_report(enumerate_attack(gate, strategy), xi=strategy.xi,
                          gate_text=gate.to_text(), strategy_text=strategy.to_text())


def wrap_angles(angles) -> np.ndarray:
    return np.mod(np.asarray(angles, dtype=float), 2.0 * math.pi)


def batch_gate_tables(unitaries: np.ndarray, intercepted, angles, chunk: int = 2048):
    """``(cond, flips)`` for many gates under one fixed Eve strategy.

    ``unitaries`` has shape ``(G, 2^N, 2^N)``; outputs gain a leading ``G`` axis.
    """
    unitaries = np.asarray(unitaries, dtype=complex)
    n = num_qubits(unitaries[0])
    intercepted = tuple(sorted(intercepted))
    model = AttackModel(np.eye(1 << n), intercepted)
    bras = model.bras_for(np.asarray(angles, dtype=float).reshape(1, -1, 2))
    basis = _basis_change(n)
    conds, flips = [], []
    for start in range(0, len(unitaries), chunk):
        v = unitaries[start:start + chunk, None] @ basis[None]
        c, f = _tables(v, bras, n, intercepted, model.mask)
        conds.append(c)
        flips.append(f)
    return np.concatenate(conds), np.concatenate(flips)
