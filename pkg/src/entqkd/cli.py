"""Command-line front end: ``entqkd <subcommand> [options]``.

Exit status is 0 on success, 2 for malformed input and 1 for internal
failures.  Options may also come from ``--config FILE`` holding
``key = value`` lines named like the long options; flags on the command
line win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import keyrate, metrics, optimize, protocol, session
from .datasets import Dataset, write_rows
from .gates import gate_num_qubits, parse_angle, parse_gate


class UsageError(Exception):
    """Raised for input the user can fix; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _gate(text):
    try:
        return parse_gate(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _angle_list(text):
    try:
        return [parse_angle(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _probability(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is outside [0, 1]")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entqkd", description="Eavesdropping analysis for entangled-group QKD.")
    parser.add_argument("--config", help="file of key = value option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="info and QBER of one gate/attack pair")
    p.add_argument("--gate", type=_gate, required=True)
    p.add_argument("--eve", help="comma-separated bases (z, x, y), one per intercepted qubit")
    p.add_argument("--eve-angles", type=_angle_list, help="beta,gamma per intercepted qubit")
    p.add_argument("--intercept", help="comma-separated qubit indices (default: first qubits)")
    p.add_argument("--xi", type=_probability, default=1.0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")

    p = sub.add_parser("optimize", help="Eve's best attack or the best-defended Cartan gate")
    p.add_argument("target", choices=("eve", "gate"))
    p.add_argument("--gate", type=_gate)
    p.add_argument("--intercept")
    p.add_argument("--objective", choices=("ratio", "info"), default="ratio")
    p.add_argument("--restarts", type=_positive_int)
    p.add_argument("--max-iterations", type=_positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="print best value per iteration to stderr")
    p.add_argument("--output")

    p = sub.add_parser("sweep", help="uniform grids over gate or attack parameters")
    p.add_argument("kind", choices=("cartan", "eve"))
    p.add_argument("--grid", type=_positive_int)
    p.add_argument("--eve-mode", choices=("both_z", "one_z"), default="both_z")
    p.add_argument("--mode", choices=("both", "one"), default="both")
    p.add_argument("--gate", type=_gate)
    p.add_argument("--output")

    p = sub.add_parser("keyrate", help="relative key rates against the QBER factor delta")
    p.add_argument("--q", type=float, default=0.06)
    p.add_argument("--s", type=float, default=keyrate.SLOPE)
    p.add_argument("--delta-min", type=float, default=0.01)
    p.add_argument("--delta-max", type=float, default=3.0)
    p.add_argument("--delta-points", type=_positive_int, default=300)
    p.add_argument("--output")

    p = sub.add_parser("ustar-check", help="information bounds of the U* family")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--draws", type=_positive_int, default=100)
    p.add_argument("--restarts", type=_positive_int, default=32)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="Monte Carlo session compared with exact enumeration")
    p.add_argument("--gate", type=_gate, required=True)
    p.add_argument("--groups", type=_positive_int, default=10000)
    eve = p.add_mutually_exclusive_group()
    eve.add_argument("--no-eve", action="store_true")
    eve.add_argument("--eve", help="strategy text, e.g. 0:z,1:z or 0:0.39:0")
    p.add_argument("--xi", type=_probability, default=1.0)
    p.add_argument("--depth", type=_positive_int, default=1, help="groups in flight")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the event log as JSON lines to this file")
    p.add_argument("--output")
    return parser


def _read_config(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


def _split_config(argv: list[str]) -> tuple[str | None, list[str]]:
    """Pull ``--config FILE`` out of ``argv``, before or after the subcommand."""
    rest, path, i = [], None, 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file name")
            path, i = argv[i + 1], i + 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            rest.append(tok)
        i += 1
    return path, rest


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    path, argv = _split_config(argv)
    if path is None:
        return parser.parse_args(argv)
    commands = [t for t in argv if t in COMMANDS]
    if not commands:
        return parser.parse_args(argv)
    command = commands[0]
    sub = parser._subparsers._group_actions[0].choices[command]
    flags = {a.option_strings[-1][2:]: a for a in sub._actions if a.option_strings and a.dest != "help"}
    extra = []
    for key, value in _read_config(path).items():
        action = flags.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for {command}")
        if action.nargs == 0:
            if value.lower() in ("1", "true", "yes"):
                extra.append("--" + key)
            elif value.lower() not in ("0", "false", "no"):
                raise UsageError(f"config key {key!r} expects a boolean")
        else:
            extra += ["--" + key, value]
    # config values go first so explicit flags override them
    at = argv.index(command) + 1
    return parser.parse_args(argv[:at] + extra + argv[at:])


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _emit_dataset(ds: Dataset, path) -> None:
    fh = _open_out(path)
    try:
        ds.write_csv(fh)
    finally:
        if path:
            fh.close()


def _emit_json(record: dict, path) -> None:
    text = json.dumps(record, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _indices(text, n):
    if text is None:
        return None
    try:
        idx = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad qubit list {text!r}") from None
    if len(set(idx)) != len(idx) or any(not 0 <= q < n for q in idx):
        raise UsageError(f"qubit list {text!r} must name distinct qubits below {n}")
    return sorted(idx)


def _strategy_from_args(args, n) -> protocol.EveStrategy:
    intercept = _indices(args.intercept, n)
    if args.eve is not None and args.eve_angles is not None:
        raise UsageError("give either --eve or --eve-angles")
    if args.eve is not None:
        bases = [b.strip().lower() for b in args.eve.split(",")]
        if intercept is None:
            intercept = list(range(len(bases)))
        try:
            return protocol.EveStrategy.from_bases(bases, intercept, args.xi)
        except KeyError as exc:
            raise UsageError(f"unknown basis {exc.args[0]!r} in --eve (use z, x or y)") from None
        except ValueError as exc:
            raise UsageError(f"bad --eve value {args.eve!r}: {exc}") from None
    if args.eve_angles is not None:
        if len(args.eve_angles) % 2:
            raise UsageError("--eve-angles needs beta,gamma pairs")
        if intercept is None:
            intercept = list(range(len(args.eve_angles) // 2))
        try:
            return protocol.EveStrategy.from_angles(intercept, args.eve_angles, args.xi)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return protocol.EveStrategy({}, args.xi)


def cmd_analyze(args) -> int:
    n = gate_num_qubits(args.gate)
    strategy = _strategy_from_args(args, n)
    try:
        strategy.check(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    outcome = protocol.enumerate_attack(args.gate, strategy)
    report = metrics.metrics_report(outcome, args.xi, args.gate.to_text(), strategy.to_text())
    if args.format == "json":
        _emit_json(report.as_dict(), args.output)
        return 0
    fh = _open_out(args.output)
    try:
        write_rows(fh, metrics.CSV_HEADER + ("info_scaled", "qber_scaled"),
                   [report.csv_row() + [repr(report.info_scaled), repr(report.qber_scaled)]])
    finally:
        if args.output:
            fh.close()
    return 0


def _trace(enabled):
    if not enabled:
        return None
    return lambda it, value: print(f"iteration {it}: {value!r}", file=sys.stderr)


def cmd_optimize(args) -> int:
    if args.target == "eve":
        if args.gate is None:
            raise UsageError("optimize eve needs --gate")
        config = optimize.OptimizationConfig(seed=args.seed)
        if args.restarts:
            config = replace(config, restarts=args.restarts)
        if args.max_iterations:
            config = replace(config, max_iterations=args.max_iterations)
        n = gate_num_qubits(args.gate)
        found = optimize.optimize_eve(args.gate, _indices(args.intercept, n), config, args.objective,
                                      _trace(args.trace))
        record = {"target": "eve", "gate": args.gate.to_text(), "seed": args.seed, **found.as_dict()}
    else:
        if args.gate is not None or args.intercept is not None:
            raise UsageError("optimize gate searches Cartan gates; --gate and --intercept do not apply")
        outer = replace(optimize.OUTER_SEARCH, seed=args.seed)
        final = optimize.OptimizationConfig(seed=args.seed)
        if args.restarts:
            outer = replace(outer, restarts=args.restarts)
        if args.max_iterations:
            outer = replace(outer, max_iterations=args.max_iterations)
        found = optimize.optimize_gate(outer, replace(optimize.INNER_SEARCH, seed=args.seed), final,
                                       _trace(args.trace))
        record = {"target": "gate", "seed": args.seed, "outer_evaluations": found.outer_evaluations,
                  **found.as_dict()}
    _emit_json(record, args.output)
    return 0


def cmd_sweep(args) -> int:
    if args.kind == "cartan":
        ds = optimize.sweep_cartan(args.grid or 33, args.eve_mode)
    else:
        if args.gate is None:
            raise UsageError("sweep eve needs --gate")
        if gate_num_qubits(args.gate) != 2:
            raise UsageError("sweep eve needs a two-qubit gate")
        ds = optimize.sweep_eve(args.gate, args.grid or 21, args.mode)
    _emit_dataset(ds, args.output)
    return 0


def cmd_keyrate(args) -> int:
    if not 0.0 < args.q < 0.5:
        raise UsageError("--q must lie in (0, 0.5)")
    if not 0.0 < args.delta_min <= args.delta_max:
        raise UsageError("need 0 < --delta-min <= --delta-max")
    hi = min(args.delta_max, 0.5 / args.q * (1 - 1e-9))
    if args.delta_min >= 0.5 / args.q:
        raise UsageError("delta range lies entirely beyond QBER 0.5")
    ds = keyrate.rate_figure_dataset(args.q, args.s, np.linspace(args.delta_min, hi, args.delta_points))
    _emit_dataset(ds, args.output)
    crossing = keyrate.delta_breakeven(args.q, args.s)
    print(f"# q={args.q!r} s={args.s!r} delta_breakeven={crossing!r} "
          f"gain_fraction={keyrate.gain_fraction(args.q, args.s)!r}", file=sys.stderr)
    return 0


def cmd_ustar_check(args) -> int:
    if args.n < 2:
        raise UsageError("ustar-check needs --n >= 2")
    config = optimize.OptimizationConfig(restarts=args.restarts, seed=args.seed)
    lines = optimize.ustar_check(args.n, args.draws, config, args.seed)
    print(f"# n={args.n} draws={args.draws} seed={args.seed}")
    for line in lines:
        print(line.text())
    return 0


def cmd_simulate(args) -> int:
    n = gate_num_qubits(args.gate)
    if args.no_eve or args.eve is None:
        strategy = protocol.EveStrategy({})
    else:
        try:
            strategy = protocol.parse_strategy(args.eve, args.xi)
            strategy.check(n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    config = session.SessionConfig(args.gate, strategy, args.groups, args.depth, args.seed,
                                   record_events=bool(args.trace))
    result = session.run_session(config)
    report = session.compare_with_analytic(result, protocol.enumerate_attack(args.gate, strategy),
                                           strategy.xi if strategy.intercepted else 1.0)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(result.events_jsonl())
    record = {"gate": args.gate.to_text(), "strategy": strategy.to_text(), "xi": strategy.xi,
              **result.summary(), "qber_exact": report.qber_exact, "qber_z": report.qber_z,
              "max_abs_z": report.max_abs_z, "info_exact": report.info_exact,
              "note": "eve_empirical_info_proxy is a plug-in estimate, biased upward for small counts"}
    _emit_json(_finite(record), args.output)
    return 0


def _finite(record: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in record.items()}


COMMANDS = {"analyze": cmd_analyze, "optimize": cmd_optimize, "sweep": cmd_sweep, "keyrate": cmd_keyrate,
            "ustar-check": cmd_ustar_check, "simulate": cmd_simulate}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"entqkd: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # output consumer went away (e.g. piped into head)
        sys.stderr.close()
        return 0
    except Exception as exc:  # noqa: BLE001 - every other failure is internal
        print(f"entqkd: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
