"""Intercept-resend analysis of QKD with entangled qubit groups.

Alice encodes N BB84 qubits, applies a joint unitary and sends the qubits
one at a time; Bob undoes the unitary once the whole group has arrived.
The modules compute Eve's information and the QBER she causes exactly,
optimize both sides of the attack, turn slopes into key rates and
simulate whole sessions.
"""

from .gates import (C_STAR, CartanGate, CartanParams, ExplicitGate, IdentityGate, Parity, UStarGate,
                    cartan_gate, parse_gate, u_star)
from .keyrate import delta_breakeven, gain_fraction, relative_key_rate
from .metrics import MetricsReport, apply_fraction, metrics_report, mutual_information, qber
from .optimize import OptimizationConfig, optimize_eve, optimize_gate
from .protocol import AttackModel, AttackOutcome, EveStrategy, enumerate_attack, parse_strategy
from .session import SessionConfig, compare_with_analytic, interleaving_trace, run_session

__version__ = "0.1.0"

__all__ = [
    "C_STAR", "CartanGate", "CartanParams", "ExplicitGate", "IdentityGate", "Parity", "UStarGate",
    "cartan_gate", "parse_gate", "u_star",
    "delta_breakeven", "gain_fraction", "relative_key_rate",
    "MetricsReport", "apply_fraction", "metrics_report", "mutual_information", "qber",
    "OptimizationConfig", "optimize_eve", "optimize_gate",
    "AttackModel", "AttackOutcome", "EveStrategy", "enumerate_attack", "parse_strategy",
    "SessionConfig", "compare_with_analytic", "interleaving_trace", "run_session",
]
