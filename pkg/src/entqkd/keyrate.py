"""Relative key rates after error correction.

Error correction is assumed to leak ``H_bin(q)`` bits per key bit to Eve.
On top of that Eve holds ``2q`` bits (BB84 intercept-resend) or
``s * delta * q`` bits for an entangled protocol whose QBER is ``delta``
times the BB84 one and whose information/QBER slope is ``s``.  The
relative rate is ``r = R_net / R_sift = 1 - I_EC``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import bisect

from .datasets import Dataset

# slope of Eve's optimal information/QBER line against C(pi/32, 3pi/8, pi/32)
SLOPE = 0.5965

PROTOCOLS = ("bb84", "enhanced2q", "ideal_s0")


def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"binary entropy needs q in [0, 1], got {q}")
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def _check(q: float, delta: float) -> None:
    if not 0.0 <= q < 0.5:
        raise ValueError(f"QBER must lie in [0, 0.5), got {q}")
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if delta * q >= 0.5:
        raise ValueError(f"scaled QBER delta*q = {delta * q} must stay below 0.5")


def eve_info_after_ec(q: float, protocol: str = "bb84", delta: float = 1.0, s: float = SLOPE) -> float:
    """Eve's information per sifted bit once error correction has been run."""
    _check(q, delta)
    if protocol == "bb84":
        return 2.0 * q + binary_entropy(q)
    if protocol == "enhanced2q":
        return s * delta * q + binary_entropy(delta * q)
    if protocol == "ideal_s0":
        return binary_entropy(delta * q)
    raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")


def relative_key_rate(q: float, protocol: str = "bb84", delta: float = 1.0, s: float = SLOPE) -> float:
    """``1 - I_EC``; negative values mean no secret key and are returned as is."""
    return 1.0 - eve_info_after_ec(q, protocol, delta, s)


def delta_breakeven(q: float, s: float = SLOPE, xtol: float = 1e-9) -> float | None:
    """QBER factor at which the entangled protocol's rate drops to BB84's.

    Searches ``delta`` in ``[1, 0.5/q)`` by bisection; ``None`` when the
    two rates do not cross there.
    """
    if not 0.0 < q < 0.5:
        raise ValueError(f"breakeven needs q in (0, 0.5), got {q}")
    target = relative_key_rate(q, "bb84")

    def gap(delta: float) -> float:
        return relative_key_rate(q, "enhanced2q", delta, s) - target

    lo, hi = 1.0, (0.5 / q) * (1.0 - 1e-12)
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return lo
    if g_lo * g_hi > 0.0:
        return None
    return bisect(gap, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def gain_fraction(q: float, s: float = SLOPE, delta: float = 1.0) -> float:
    """Gain of the entangled protocol over BB84 as a fraction of the ``s = 0`` gain."""
    base = relative_key_rate(q, "bb84")
    ideal = relative_key_rate(q, "ideal_s0", delta)
    return (relative_key_rate(q, "enhanced2q", delta, s) - base) / (ideal - base)


def pns_advantage_bound(epsilon: float, n: int) -> float:
    """Chance that every qubit of an ``n``-qubit group leaks a multi-photon copy."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if n < 1:
        raise ValueError("group size must be at least 1")
    return epsilon ** n


def rate_figure_dataset(q: float = 0.06, s: float = SLOPE, deltas=None) -> Dataset:
    """Relative rates of the three protocols against ``delta`` (BB84 is flat)."""
    if deltas is None:
        deltas = np.linspace(0.01, min(3.0, 0.5 / q * 0.999) if q > 0 else 3.0, 300)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0):
        raise ValueError("delta values must be positive")
    bb84 = relative_key_rate(q, "bb84")
    rows = [(d, relative_key_rate(q, "enhanced2q", d, s), relative_key_rate(q, "ideal_s0", d), bb84)
            for d in deltas]
    return Dataset(("delta", "r_enhanced", "r_ideal", "r_bb84"), np.array(rows))
