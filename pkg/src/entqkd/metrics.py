"""Information and disturbance metrics computed from an :class:`AttackOutcome`.

Eve's information per bit is ``(1/N)[H(A) + H(E) - H(A,E)]`` with every
entropy averaged uniformly over Alice's basis string (Eve learns the
bases during sifting).  The QBER is Bob's flip probability on matched
bases, averaged over qubits, bits and bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import entr

from .protocol import AttackModel, AttackOutcome, RandomVariableSplit

_LN2 = math.log(2.0)

CSV_HEADER = ("gate_spec", "strategy_descriptor", "xi", "info", "qber", "ratio")


def shannon_entropy(dist) -> float:
    """Entropy in bits of a probability table of any shape (``0 log 0 = 0``)."""
    p = np.asarray(dist, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, not 1")
    return float(entr(p).sum() / _LN2)


def _entropy(p: np.ndarray, axes) -> np.ndarray:
    return entr(np.clip(p, 0.0, None)).sum(axis=axes) / _LN2


def info_from_cond(cond: np.ndarray, n: int) -> np.ndarray:
    """Per-bit mutual information from ``cond[..., alpha, a, e]``; leading axes are kept."""
    joint = cond / (1 << n)
    h_ae = _entropy(joint, (-2, -1))
    h_e = _entropy(joint.sum(axis=-2), -1)
    return (n + h_e.mean(axis=-1) - h_ae.mean(axis=-1)) / n


def qber_from_flips(flips: np.ndarray) -> np.ndarray:
    """QBER from ``flips[..., alpha, a, j]``: uniform average over alpha, a and j."""
    return flips.mean(axis=(-3, -2, -1))


def mutual_information(outcome: AttackOutcome) -> float:
    return float(info_from_cond(outcome.cond, outcome.n))


def qber(outcome: AttackOutcome) -> float:
    return float(qber_from_flips(outcome.flips))


def info_qber(model: AttackModel, angles) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(info, qber)`` for a batch of angle sets on one model."""
    cond, flips = model.tables(angles)
    return info_from_cond(cond, model.n), qber_from_flips(flips)


@dataclass(frozen=True)
class MetricsReport:
    """Eve's information and the induced QBER of one (gate, strategy) pair.

    ``info`` and ``qber`` are full-strength values; the ``*_scaled`` views
    apply the attacked fraction ``xi``.
    """

    info: float
    qber: float
    xi: float = 1.0
    gate_text: str = ""
    strategy_text: str = ""

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
        if self.qber == 0.0 and abs(self.info) > 1e-9:
            raise AssertionError(f"information {self.info} without disturbance")

    @property
    def ratio(self) -> float | None:
        """``info / qber``, or ``None`` when the attack causes no errors."""
        if self.qber <= 0.0:
            return None
        return self.info / self.qber

    @property
    def ratio_defined(self) -> bool:
        return self.ratio is not None

    @property
    def info_scaled(self) -> float:
        return self.xi * self.info

    @property
    def qber_scaled(self) -> float:
        return self.xi * self.qber

    def csv_row(self) -> list[str]:
        r = self.ratio
        return [self.gate_text, self.strategy_text, repr(self.xi), repr(self.info), repr(self.qber),
                "" if r is None else repr(r)]

    def as_dict(self) -> dict:
        return {"gate": self.gate_text, "strategy": self.strategy_text, "xi": self.xi,
                "info": self.info, "qber": self.qber, "ratio": self.ratio,
                "info_scaled": self.info_scaled, "qber_scaled": self.qber_scaled}


def metrics_report(outcome: AttackOutcome, xi: float = 1.0, gate_text: str = "",
                   strategy_text: str = "") -> MetricsReport:
    q = qber(outcome)
    info = mutual_information(outcome)
    # enumeration roundoff: an undisturbed attack carries exactly zero information
    if q < 1e-15:
        if abs(info) > 1e-9:
            raise AssertionError(f"information {info} without disturbance")
        q, info = 0.0, 0.0
    return MetricsReport(info, q, xi, gate_text, strategy_text)


def apply_fraction(report: MetricsReport, xi: float) -> MetricsReport:
    """Same attack applied to a fraction ``xi`` of the groups."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    return replace(report, xi=xi)


@dataclass(frozen=True)
class BoundDecomposition:
    info_first: float  # I(A; E_first) in bits, alpha-averaged
    h_last: float  # H(E_last | A, E_first), alpha-averaged
    info_total: float  # I(A, E) per bit

    def chain_value(self, n: int) -> float:
        """``(1 - h_last) / n``: the per-bit information implied when ``info_first`` is 0."""
        return (1.0 - self.h_last) / n


def bound_decomposition(outcome: AttackOutcome, split: RandomVariableSplit | None = None) -> BoundDecomposition:
    """Split Eve's information into what her earlier outcomes and her final one reveal.

    Requires Eve to intercept every qubit.  Outcome bits are ordered by
    measurement, so the last measured qubit is the least significant bit
    of the ``e`` index.
    """
    n = outcome.n
    if len(outcome.intercepted) != n:
        raise ValueError("bound decomposition needs every qubit intercepted")
    expected = RandomVariableSplit(tuple(outcome.intercepted[:-1]), outcome.intercepted[-1])
    if split is not None and split != expected:
        raise ValueError("split does not follow Eve's ascending measurement order")
    joint = outcome.joint.reshape(1 << n, 1 << n, 1 << (n - 1), 2)  # alpha, a, e_first, e_last
    p_a_first = joint.sum(axis=-1)
    h_a = _entropy(p_a_first.sum(axis=-1), -1)
    h_first = _entropy(p_a_first.sum(axis=-2), -1)
    h_a_first = _entropy(p_a_first, (-2, -1))
    h_all = _entropy(joint, (-3, -2, -1))
    info_first = float(np.mean(h_a + h_first - h_a_first))
    h_last = float(np.mean(h_all - h_a_first))
    return BoundDecomposition(info_first, h_last, mutual_information(outcome))
