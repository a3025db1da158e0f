"""Eve's best attack for a fixed gate, the gate that best defends against
her, and uniform parameter sweeps.

Both levels use multi-start Nelder-Mead.  Every restart's simplex advances
in lock-step so one vectorized objective call serves all restarts at each
stage; restarts never interact, so each one follows the path it would
follow alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import gates
from .datasets import Dataset
from .gates import CartanGate, CartanParams, GateSpec, gate_num_qubits
from .metrics import MetricsReport, info_from_cond, info_qber, metrics_report, qber_from_flips
from .protocol import AttackModel, EveStrategy, batch_gate_tables

TWO_PI = 2.0 * math.pi

# nominal Nelder-Mead coefficients
_REFLECT, _EXPAND, _CONTRACT, _SHRINK = 1.0, 2.0, 0.5, 0.5

Trace = Optional[Callable[[int, float], None]]


@dataclass(frozen=True)
class OptimizationConfig:
    max_iterations: int = 2000
    tolerance_f: float = 1e-10
    tolerance_x: float = 1e-8
    restarts: int = 32
    seed: int = 0
    initial_step: float = 0.3

    def __post_init__(self):
        if self.max_iterations < 1 or self.restarts < 1:
            raise ValueError("max_iterations and restarts must be positive")
        if self.tolerance_f <= 0 or self.tolerance_x <= 0 or self.initial_step <= 0:
            raise ValueError("tolerances and initial step must be positive")


# cheaper settings for the inner problem while the outer search runs
INNER_SEARCH = OptimizationConfig(max_iterations=800, tolerance_f=1e-9, tolerance_x=1e-7, restarts=8)
OUTER_SEARCH = OptimizationConfig(max_iterations=150, tolerance_f=1e-6, tolerance_x=1e-4, restarts=4)


@dataclass
class SimplexResult:
    x: np.ndarray  # (restarts, d) best vertex of each restart
    f: np.ndarray  # (restarts,)
    iterations: np.ndarray
    evaluations: int


def nelder_mead(fun, starts, config: OptimizationConfig = OptimizationConfig(), trace: Trace = None) -> SimplexResult:
    """Minimize ``fun`` from every row of ``starts`` independently.

    ``fun`` maps an ``(m, d)`` array of points to ``m`` values.  A restart
    stops when both its simplex value spread and vertex spread fall below
    the configured tolerances, or after ``max_iterations``.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    r, d = starts.shape
    sim = np.repeat(starts[:, None, :], d + 1, axis=1)
    sim[:, 1:, :] += config.initial_step * np.eye(d)
    fs = np.asarray(fun(sim.reshape(-1, d)), dtype=float).reshape(r, d + 1)
    nfev = r * (d + 1)
    active = np.ones(r, dtype=bool)
    nit = np.zeros(r, dtype=int)

    for it in range(config.max_iterations):
        order = np.argsort(fs, axis=1, kind="stable")
        fs = np.take_along_axis(fs, order, axis=1)
        sim = np.take_along_axis(sim, order[:, :, None], axis=1)
        spread_f = np.max(np.abs(fs[:, 1:] - fs[:, :1]), axis=1)
        spread_x = np.max(np.abs(sim[:, 1:] - sim[:, :1]), axis=(1, 2))
        active &= ~((spread_f <= config.tolerance_f) & (spread_x <= config.tolerance_x))
        if trace is not None:
            trace(it, float(fs[:, 0].min()))
        if not active.any():
            break
        rows = np.flatnonzero(active)
        s, f = sim[rows], fs[rows]
        xbar = s[:, :-1].mean(axis=1)
        xw = s[:, -1]
        xr = xbar + _REFLECT * (xbar - xw)
        fr = np.asarray(fun(xr), dtype=float)
        nfev += len(rows)
        new_x, new_f = xr.copy(), fr.copy()
        shrink = np.zeros(len(rows), dtype=bool)

        expand = fr < f[:, 0]
        if expand.any():
            xe = xbar[expand] + _REFLECT * _EXPAND * (xbar[expand] - xw[expand])
            fe = np.asarray(fun(xe), dtype=float)
            nfev += len(xe)
            better = fe < fr[expand]
            idx = np.flatnonzero(expand)[better]
            new_x[idx], new_f[idx] = xe[better], fe[better]

        contract = ~expand & (fr >= f[:, -2])
        if contract.any():
            outside = contract & (fr < f[:, -1])
            xc = np.where(outside[:, None],
                          xbar + _CONTRACT * _REFLECT * (xbar - xw),
                          xbar - _CONTRACT * (xbar - xw))
            idx = np.flatnonzero(contract)
            fc = np.asarray(fun(xc[idx]), dtype=float)
            nfev += len(idx)
            ok = np.where(outside[idx], fc <= fr[idx], fc < f[idx, -1])
            new_x[idx[ok]], new_f[idx[ok]] = xc[idx[ok]], fc[ok]
            shrink[idx[~ok]] = True

        keep = ~shrink
        s[keep, -1], f[keep, -1] = new_x[keep], new_f[keep]
        if shrink.any():
            best = s[shrink, :1]
            moved = best + _SHRINK * (s[shrink, 1:] - best)
            fm = np.asarray(fun(moved.reshape(-1, d)), dtype=float).reshape(-1, d)
            nfev += fm.size
            s[shrink, 1:], f[shrink, 1:] = moved, fm
        sim[rows], fs[rows] = s, f
        nit[rows] += 1

    best = np.argmin(fs, axis=1)
    return SimplexResult(sim[np.arange(r), best], fs[np.arange(r), best], nit, nfev)


def restart_points(config: OptimizationConfig, dim: int, stream: int = 0) -> np.ndarray:
    """Uniform starting points in ``[0, 2 pi)^dim``, one sub-seed per restart."""
    return np.array([
        np.random.default_rng([config.seed, stream, i]).uniform(0.0, TWO_PI, dim)
        for i in range(config.restarts)
    ])


# ---------------------------------------------------------------------------
# Eve's side
# ---------------------------------------------------------------------------

def _ratio(info: np.ndarray, qber: np.ndarray) -> np.ndarray:
    # no disturbance means no information under intercept-resend; score such points 0
    safe = np.where(qber > 1e-14, qber, 1.0)
    return np.where(qber > 1e-14, info / safe, 0.0)


def eve_objective(model: AttackModel, flat_angles, objective: str = "ratio") -> np.ndarray:
    """Values Eve maximizes for a batch of flattened angle vectors."""
    flat = np.atleast_2d(flat_angles)
    info, q = info_qber(model, np.mod(flat, TWO_PI).reshape(len(flat), -1, 2))
    if objective == "ratio":
        return _ratio(info, q)
    if objective == "info":
        return info
    raise ValueError(f"unknown objective {objective!r}")


@dataclass
class EveOptimum:
    angles: np.ndarray  # (|S|, 2) in [0, 2 pi)
    intercepted: tuple[int, ...]
    value: float
    report: MetricsReport
    objective: str = "ratio"

    @property
    def strategy(self) -> EveStrategy:
        return EveStrategy.from_angles(self.intercepted, self.angles)

    def as_dict(self) -> dict:
        return {"intercepted": list(self.intercepted), "angles": self.angles.tolist(),
                "objective": self.objective, "value": self.value, "report": self.report.as_dict()}


def optimize_eve(gate: GateSpec | np.ndarray, intercepted=None, config: OptimizationConfig = OptimizationConfig(),
                 objective: str = "ratio", trace: Trace = None) -> EveOptimum:
    """Eve's best angles for ``gate`` and interception set (default: every qubit)."""
    n = gate_num_qubits(gate)
    if intercepted is None:
        intercepted = range(n)
    intercepted = tuple(sorted(intercepted))
    if not intercepted:
        raise ValueError("Eve must intercept at least one qubit")
    model = AttackModel(gate, intercepted)
    dim = 2 * len(intercepted)

    result = nelder_mead(lambda x: -eve_objective(model, x, objective),
                         restart_points(config, dim), config, trace)
    best = int(np.argmin(result.f))
    angles = np.mod(result.x[best], TWO_PI).reshape(-1, 2)
    strategy = EveStrategy.from_angles(intercepted, angles)
    report = metrics_report(model.outcome(angles), gate_text=_gate_text(gate), strategy_text=strategy.to_text())
    value = float(eve_objective(model, angles.ravel(), objective)[0])
    return EveOptimum(angles, intercepted, value, report, objective)


def _gate_text(gate) -> str:
    try:
        return gate.to_text()
    except (AttributeError, ValueError):
        return "explicit"


def interception_patterns(n: int) -> list[tuple[int, ...]]:
    """Every nonempty subset of qubits Eve could intercept."""
    return [s for k in range(1, n + 1) for s in itertools.combinations(range(n), k)]


def best_attack(gate: GateSpec | np.ndarray, config: OptimizationConfig = OptimizationConfig(),
                patterns=None) -> EveOptimum:
    """Eve's best ratio over all interception patterns of ``gate``."""
    if patterns is None:
        patterns = interception_patterns(gate_num_qubits(gate))
    found = [optimize_eve(gate, s, config) for s in patterns]
    return max(found, key=lambda o: o.value)


# ---------------------------------------------------------------------------
# Alice and Bob's side
# ---------------------------------------------------------------------------

@dataclass
class GateOptimum:
    c: CartanParams
    inner: EveOptimum
    value: float
    outer_evaluations: int = 0

    def as_dict(self) -> dict:
        return {"c": list(self.c.as_tuple()), "gate": CartanGate(self.c).to_text(),
                "value": self.value, "inner": self.inner.as_dict()}


def optimize_gate(config: OptimizationConfig = OUTER_SEARCH, inner_config: OptimizationConfig = INNER_SEARCH,
                  final_config: OptimizationConfig = OptimizationConfig(), trace: Trace = None) -> GateOptimum:
    """Search Cartan parameters minimizing Eve's best ratio I/QBER.

    Eve may intercept one qubit or both; the outer search sees the larger
    of her inner optima.  The winner is re-attacked with ``final_config``
    so the reported value does not lean on the cheaper inner search.
    """
    cache: dict[tuple, float] = {}

    def defended(points: np.ndarray) -> np.ndarray:
        out = np.empty(len(points))
        for i, c in enumerate(np.mod(points, TWO_PI)):
            key = tuple(np.round(c, 12))
            if key not in cache:
                cache[key] = best_attack(CartanGate(CartanParams(*c)), inner_config).value
            out[i] = cache[key]
        return out

    result = nelder_mead(defended, restart_points(config, 3, stream=1), config, trace)
    best = int(np.argmin(result.f))
    c = CartanParams(*np.mod(result.x[best], TWO_PI))
    inner = best_attack(CartanGate(c), final_config)
    return GateOptimum(c, inner, inner.value, len(cache))


def defence_value(c: CartanParams | tuple, config: OptimizationConfig = OptimizationConfig()) -> EveOptimum:
    """Eve's best one- or two-qubit attack on ``C(c)``."""
    if not isinstance(c, CartanParams):
        c = CartanParams(*c)
    return best_attack(CartanGate(c), config)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def grid_axis(resolution: int) -> np.ndarray:
    """``resolution`` equally spaced angles covering ``[0, 2 pi]``; a single point means 0."""
    if resolution < 1:
        raise ValueError("grid resolution must be at least 1")
    if resolution == 1:
        return np.zeros(1)
    return np.linspace(0.0, TWO_PI, resolution)


def sweep_cartan(resolution: int = 33, eve_mode: str = "both_z") -> Dataset:
    """Info and QBER of a z-basis Eve for every ``C(c)`` on a uniform cube grid."""
    intercepted = {"both_z": (0, 1), "one_z": (0,)}.get(eve_mode)
    if intercepted is None:
        raise ValueError(f"eve_mode must be 'both_z' or 'one_z', got {eve_mode!r}")
    axis = grid_axis(resolution)
    cs = np.array(list(itertools.product(axis, repeat=3)))
    us = np.array([gates.cartan_gate(c) for c in cs])
    cond, flips = batch_gate_tables(us, intercepted, np.zeros((len(intercepted), 2)))
    info, q = info_from_cond(cond, 2), qber_from_flips(flips)
    return Dataset(("c1", "c2", "c3", "info", "qber"), np.column_stack([cs, info, q]))


def sweep_eve(gate: GateSpec | np.ndarray, resolution: int = 21, mode: str = "both", chunk: int = 4096) -> Dataset:
    """Info and QBER over a uniform grid of Eve's angles for a fixed two-qubit gate."""
    if mode == "both":
        intercepted = (0, 1)
        columns = ("beta1", "gamma1", "beta2", "gamma2", "info", "qber")
    elif mode == "one":
        intercepted = (0,)
        columns = ("beta1", "gamma1", "info", "qber")
    else:
        raise ValueError(f"mode must be 'both' or 'one', got {mode!r}")
    model = AttackModel(gate, intercepted)
    axis = grid_axis(resolution)
    points = np.array(list(itertools.product(axis, repeat=2 * len(intercepted))))
    info = np.empty(len(points))
    q = np.empty(len(points))
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk].reshape(-1, len(intercepted), 2)
        info[start:start + chunk], q[start:start + chunk] = info_qber(model, block)
    return Dataset(columns, np.column_stack([points, info, q]))


# ---------------------------------------------------------------------------
# U* checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckLine:
    name: str
    passed: bool
    worst: float  # worst observed value or deviation
    limit: float

    def text(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: worst={self.worst:.3e} limit={self.limit:.3e}"


def first_outcome_bias(outcome) -> float:
    """Largest ``|p(e_k = 0 | a, alpha) - 1/2|`` over all but Eve's last measured qubit."""
    m = len(outcome.intercepted)
    if m < 2:
        return 0.0
    cond = outcome.cond.reshape(outcome.cond.shape[:2] + (2,) * m)
    worst = 0.0
    for k in range(m - 1):
        other = tuple(2 + i for i in range(m) if i != k)
        p0 = cond.sum(axis=other)[..., 0]
        worst = max(worst, float(np.abs(p0 - 0.5).max()))
    return worst


def ustar_check(n: int, draws: int = 100, config: OptimizationConfig = OptimizationConfig(),
                seed: int = 0) -> list[CheckLine]:
    """Uniform first outcomes, zero information when a qubit is skipped, and the ``1/(2n)`` cap for ``U*_n``."""
    from .protocol import enumerate_attack

    rng = np.random.default_rng([seed, n])
    lines = []
    bias = 0.0
    for parity in gates.Parity:
        for sign in "+-":
            gate = gates.UStarGate(n, parity, sign * (n - 1))
            for _ in range(draws):
                strat = EveStrategy.from_angles(range(n), rng.uniform(0, TWO_PI, (n, 2)))
                bias = max(bias, first_outcome_bias(enumerate_attack(gate, strat)))
    lines.append(CheckLine("first outcomes uniform", bias <= 1e-10, bias, 1e-10))

    gate = gates.UStarGate(n)
    leak = 0.0
    for skip in range(n):
        kept = [q for q in range(n) if q != skip]
        if not kept:
            continue
        model = AttackModel(gate, kept)
        info, _ = info_qber(model, rng.uniform(0, TWO_PI, (draws, len(kept), 2)))
        leak = max(leak, float(info.max()))
    lines.append(CheckLine("one qubit skipped leaks nothing", leak <= 1e-9, leak, 1e-9))

    bound = 1.0 / (2 * n)
    best = optimize_eve(gate, None, config, objective="info")
    info = best.report.info
    lines.append(CheckLine("full attack within 1/(2N)", info <= bound + 1e-6, info, bound + 1e-6))
    lines.append(CheckLine("optimum attains 1/(2N)", abs(info - bound) <= 1e-6, abs(info - bound), 1e-6))
    return lines
