"""Monte Carlo simulation of whole protocol sessions.

Alice, Eve and Bob exchange messages in logical time.  A qubit sent at
tick ``t`` reaches Bob at ``t + 1``; his acknowledgment reaches Alice at
``t + 2``.  Alice sends at most one qubit per tick and never sends the
next qubit of a group before the previous one is acknowledged, but up to
``interleave_depth`` groups may be in flight at once.

Eve's outcomes and Bob's results are sampled from the exact branch
probabilities of the state-vector model, memoized per ``(a, alpha)``
branch so long sessions stay cheap.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gates import HADAMARD, GateSpec, eve_premeasure_gate, gate_num_qubits, product_state, resolve
from .linalg import apply_on_qubit, measure_qubit_z, tensor
from .metrics import qber as exact_qber
from .protocol import AttackOutcome, EveStrategy, bits_of


@dataclass
class SessionConfig:
    gate: GateSpec | np.ndarray
    strategy: Optional[EveStrategy] = None
    num_groups: int = 1000
    interleave_depth: int = 1
    seed: int = 0
    record_events: bool = False
    # applied to every qubit message in transit; the default models a lossless, noiseless channel
    channel: Optional[Callable[["QubitMessage"], "QubitMessage"]] = None

    def __post_init__(self):
        if self.num_groups < 1:
            raise ValueError("num_groups must be at least 1")
        if self.interleave_depth < 1:
            raise ValueError("interleave_depth must be at least 1")
        if self.strategy is None:
            self.strategy = EveStrategy({})
        self.strategy.check(self.num_qubits)

    @property
    def num_qubits(self) -> int:
        return gate_num_qubits(self.gate)


@dataclass
class GroupState:
    group_id: int
    a: int  # bit-string index, qubit 0 most significant
    alpha: int  # 0 bit = z, 1 bit = x
    bob_bases: int
    attacked: bool
    e: str = ""
    next_qubit: int = 0
    received: int = 0


@dataclass(frozen=True)
class QubitMessage:
    group_id: int
    qubit_index: int
    payload: GroupState  # handle to the group's branch


@dataclass
class SessionResult:
    n: int
    num_groups: int
    sifted_length: int
    errors: int
    flip_counts: np.ndarray  # errors per qubit position
    sifted_counts: np.ndarray  # sifted bits per qubit position
    cell_counts: np.ndarray  # [alpha, a, e] counts over attacked groups
    group_sifted: np.ndarray = field(repr=False)
    group_errors: np.ndarray = field(repr=False)
    events: list = field(default_factory=list, repr=False)
    seed: int = 0

    @property
    def estimated_qber(self) -> float:
        return self.errors / self.sifted_length if self.sifted_length else 0.0

    @property
    def eve_empirical_info_proxy(self) -> float:
        """Plug-in estimate of Eve's information per bit from attacked groups (biased at small counts)."""
        return plugin_information(self.cell_counts, self.n)

    def summary(self) -> dict:
        return {
            "n": self.n, "num_groups": self.num_groups, "seed": self.seed,
            "sifted_length": self.sifted_length, "errors": self.errors,
            "estimated_qber": self.estimated_qber,
            "eve_empirical_info_proxy": self.eve_empirical_info_proxy,
            "flip_counts": self.flip_counts.tolist(), "sifted_counts": self.sifted_counts.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=1)

    def events_jsonl(self) -> str:
        return "".join(json.dumps(ev) + "\n" for ev in self.events)


def plugin_information(cell_counts: np.ndarray, n: int) -> float:
    """Per-bit mutual information of empirical ``(a, e)`` counts, averaged over observed ``alpha``."""
    values = []
    for table in cell_counts:
        total = table.sum()
        if total == 0:
            continue
        p = table / total
        pa = p.sum(axis=1)
        pe = p.sum(axis=0)
        values.append(_h(pa) + _h(pe) - _h(p.ravel()))
    return float(np.mean(values)) / n if values else 0.0


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


class _Branches:
    """Memoized exact branch probabilities for one gate and strategy."""

    def __init__(self, gate, strategy: EveStrategy):
        self.u = resolve(gate)
        self.n = self.u.shape[0].bit_length() - 1
        self.strategy = strategy
        self.kraus = {q: eve_premeasure_gate(*strategy.angles[q]) for q in strategy.intercepted}
        self._states: dict = {}
        self._eve: dict = {}
        self._bob: dict = {}
        self._frames = {}

    def state(self, a: int, alpha: int, e: str) -> np.ndarray:
        key = (a, alpha, e)
        if key not in self._states:
            if e:
                self._eve_step(a, alpha, e[:-1])
            else:
                bits = "".join(map(str, bits_of(a, self.n)))
                bases = "".join("zx"[b] for b in bits_of(alpha, self.n))
                self._states[key] = self.u @ product_state(bits, bases)
        return self._states[key]

    def _eve_step(self, a: int, alpha: int, prefix: str) -> float:
        key = (a, alpha, prefix)
        if key not in self._eve:
            q = self.strategy.intercepted[len(prefix)]
            k = self.kraus[q]
            rotated = apply_on_qubit(k, q, self.state(a, alpha, prefix))
            zero, one = measure_qubit_z(q, rotated)
            for br in (zero, one):
                self._states[(a, alpha, prefix + str(br.outcome))] = apply_on_qubit(k.conj().T, q, br.post_state)
            self._eve[key] = zero.probability
        return self._eve[key]

    def eve_p0(self, a: int, alpha: int, prefix: str) -> float:
        return self._eve_step(a, alpha, prefix)

    def bob_cdf(self, a: int, alpha: int, e: str, bases: int) -> np.ndarray:
        key = (a, alpha, e, bases)
        if key not in self._bob:
            if bases not in self._frames:
                self._frames[bases] = tensor(*(HADAMARD if b else np.eye(2) for b in bits_of(bases, self.n)))
            amp = self._frames[bases].conj().T @ (self.u.conj().T @ self.state(a, alpha, e))
            p = np.abs(amp) ** 2
            self._bob[key] = np.cumsum(p / p.sum())
        return self._bob[key]


def run_session(config: SessionConfig) -> SessionResult:
    """Simulate ``num_groups`` groups end to end; deterministic for a given seed."""
    n = config.num_qubits
    strategy = config.strategy
    intercepted = set(strategy.intercepted)
    n_groups = config.num_groups
    rng = np.random.default_rng(config.seed)
    a_idx = rng.integers(0, 1 << n, n_groups)
    alpha_idx = rng.integers(0, 1 << n, n_groups)
    bob_idx = rng.integers(0, 1 << n, n_groups)
    attacked = rng.random(n_groups) < strategy.xi if intercepted else np.zeros(n_groups, dtype=bool)
    eve_u = rng.random((n_groups, n))
    bob_u = rng.random(n_groups)

    branches = _Branches(config.gate, strategy)
    channel = config.channel
    m = len(strategy.intercepted)
    cell_counts = np.zeros((1 << n, 1 << n, 1 << m), dtype=np.int64)
    flip_counts = np.zeros(n, dtype=np.int64)
    sifted_counts = np.zeros(n, dtype=np.int64)
    group_sifted = np.zeros(n_groups, dtype=np.int64)
    group_errors = np.zeros(n_groups, dtype=np.int64)
    events: list = []
    log = events.append if config.record_events else None

    def bob_finish(g: GroupState) -> None:
        e = g.e if g.attacked else ""
        cdf = branches.bob_cdf(g.a, g.alpha, e, g.bob_bases)
        b = min(int(np.searchsorted(cdf, bob_u[g.group_id], side="right")), (1 << n) - 1)
        matched = ~(g.alpha ^ g.bob_bases)
        wrong = g.a ^ b
        for j in range(n):
            bit = 1 << (n - 1 - j)
            if matched & bit:
                sifted_counts[j] += 1
                group_sifted[g.group_id] += 1
                if wrong & bit:
                    flip_counts[j] += 1
                    group_errors[g.group_id] += 1
        if g.attacked:
            cell_counts[g.alpha, g.a, int(g.e, 2) if g.e else 0] += 1

    def eve_intercept(msg: QubitMessage) -> None:
        g = msg.payload
        if g.attacked and msg.qubit_index in intercepted:
            p0 = branches.eve_p0(g.a, g.alpha, g.e)
            g.e += "0" if eve_u[g.group_id, msg.qubit_index] < p0 else "1"

    # discrete-event loop: heap of (time, order, kind, payload); acks sort before sends at equal times
    queue: list = []
    counter = 0
    in_flight: dict[int, GroupState] = {}
    ready: list[int] = []
    next_group = 0
    done = 0
    t = 0
    while done < n_groups:
        while next_group < n_groups and len(in_flight) < config.interleave_depth:
            g = GroupState(next_group, int(a_idx[next_group]), int(alpha_idx[next_group]),
                           int(bob_idx[next_group]), bool(attacked[next_group]))
            in_flight[next_group] = g
            heapq.heappush(ready, next_group)
            next_group += 1
        while queue and queue[0][0] <= t:
            _, _, kind, msg = heapq.heappop(queue)
            g = msg.payload
            if kind == "arrive":
                g.received += 1
                if g.received == n:
                    bob_finish(g)
                    if log:
                        log({"t": t, "event": "complete", "group": g.group_id, "qubit": None})
                counter += 1
                heapq.heappush(queue, (t + 1, counter, "ack", msg))
            else:  # ack reaches Alice
                if log:
                    log({"t": t, "event": "ack", "group": g.group_id, "qubit": msg.qubit_index})
                if g.next_qubit < n:
                    heapq.heappush(ready, g.group_id)
                else:
                    del in_flight[g.group_id]
                    done += 1
        if done >= n_groups:
            break
        if next_group < n_groups and len(in_flight) < config.interleave_depth:
            continue  # a slot opened this tick; admit the next group before sending
        if ready:
            gid = heapq.heappop(ready)
            g = in_flight[gid]
            msg = QubitMessage(gid, g.next_qubit, g)
            g.next_qubit += 1
            if log:
                log({"t": t, "event": "send", "group": gid, "qubit": msg.qubit_index})
            eve_intercept(msg)
            if channel is not None:
                msg = channel(msg)
            counter += 1
            heapq.heappush(queue, (t + 1, counter, "arrive", msg))
        t += 1

    return SessionResult(n, n_groups, int(sifted_counts.sum()), int(flip_counts.sum()), flip_counts,
                         sifted_counts, cell_counts, group_sifted, group_errors, events, config.seed)


def interleaving_trace(config: SessionConfig) -> list[dict]:
    """Ordered ``send`` / ``ack`` / ``complete`` events of a session."""
    cfg = SessionConfig(config.gate, config.strategy, config.num_groups, config.interleave_depth,
                        config.seed, record_events=True, channel=config.channel)
    return run_session(cfg).events


def idle_slots(events: list[dict]) -> int:
    """Ticks without a send between the first and the last send."""
    sends = sorted(ev["t"] for ev in events if ev["event"] == "send")
    return sum(b - a - 1 for a, b in zip(sends, sends[1:]))


@dataclass
class ComparisonReport:
    qber_empirical: float
    qber_exact: float
    qber_z: float
    cell_z: list  # (alpha, a, e, z)
    info_proxy: float
    info_exact: float

    @property
    def max_abs_z(self) -> float:
        zs = [abs(self.qber_z)] + [abs(c[-1]) for c in self.cell_z]
        return max(zs)

    def passed(self, threshold: float = 4.0) -> bool:
        return self.max_abs_z <= threshold


def compare_with_analytic(result: SessionResult | SessionConfig, outcome: AttackOutcome | None = None,
                          xi: float | None = None) -> ComparisonReport:
    """z-scores of the session's QBER and ``p(e | a, alpha)`` cells against exact enumeration.

    A config is run first; a missing outcome is enumerated from the
    config's gate and strategy.  The QBER standard error is clustered by
    group because positions in one group share Eve's measurement record.
    """
    from .metrics import mutual_information
    from .protocol import enumerate_attack

    if isinstance(result, SessionConfig):
        config = result
        result = run_session(config)
        if outcome is None:
            outcome = enumerate_attack(config.gate, config.strategy)
        if xi is None:
            xi = config.strategy.xi if config.strategy.intercepted else 1.0
    if outcome is None:
        raise ValueError("an AttackOutcome is needed when comparing a finished result")
    if xi is None:
        xi = 1.0
    exact = xi * exact_qber(outcome)
    q_hat = result.estimated_qber
    total = result.group_sifted.sum()
    resid = result.group_errors - q_hat * result.group_sifted
    se = math.sqrt(float(np.sum(resid.astype(float) ** 2))) / total if total else 0.0
    if se > 0:
        qz = (q_hat - exact) / se
    else:
        qz = 0.0 if abs(q_hat - exact) < 1e-12 else math.inf

    cells = []
    for x in range(outcome.cond.shape[0]):
        for a in range(outcome.cond.shape[1]):
            count = int(result.cell_counts[x, a].sum())
            for e in range(outcome.cond.shape[2]):
                p = float(outcome.cond[x, a, e])
                if count * p < 10:
                    continue
                k = int(result.cell_counts[x, a, e])
                var = count * p * (1 - p)
                if var > 1e-9:
                    z = (k - count * p) / math.sqrt(var)
                else:
                    z = 0.0 if abs(k - count * p) < 0.5 else math.inf
                cells.append((x, a, e, z))
    return ComparisonReport(q_hat, exact, qz, cells, result.eve_empirical_info_proxy,
                            mutual_information(outcome))
