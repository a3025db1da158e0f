import json
import math

import numpy as np
import pytest

from entqkd.gates import C_STAR, CartanGate, IdentityGate, UStarGate
from entqkd.protocol import EveStrategy, enumerate_attack
from entqkd.session import (QubitMessage, SessionConfig, compare_with_analytic, idle_slots, interleaving_trace,
                            plugin_information, run_session)

OPTIMAL = EveStrategy({0: (math.pi / 8, 0.0), 1: (math.pi / 2, math.pi / 2)})


def serial(events):
    return [(e["event"], e["group"], e["qubit"]) for e in events if e["event"] != "complete"]


class TestRunSession:
    def test_no_eve_exact(self):
        r = run_session(SessionConfig(UStarGate(2), None, 10_000, seed=1))
        assert r.estimated_qber == 0.0 and r.errors == 0

    def test_bb84_single_qubit(self):
        r = run_session(SessionConfig(IdentityGate(1), EveStrategy.from_bases(["z"]), 100_000, seed=2))
        sigma = math.sqrt(0.25 * 0.75 / r.sifted_length)
        assert abs(r.estimated_qber - 0.25) <= 3 * sigma

    def test_c_star(self):
        r = run_session(SessionConfig(CartanGate(C_STAR), OPTIMAL, 100_000, seed=3))
        sigma = math.sqrt(0.375 * 0.625 / r.sifted_length)
        assert abs(r.estimated_qber - 0.375) <= 3 * sigma

    def test_deterministic(self):
        cfg = SessionConfig(CartanGate(C_STAR), OPTIMAL, 2000, interleave_depth=3, seed=9)
        a, b = run_session(cfg), run_session(cfg)
        assert a.to_json() == b.to_json()
        assert np.array_equal(a.cell_counts, b.cell_counts)
        assert run_session(SessionConfig(CartanGate(C_STAR), OPTIMAL, 2000, seed=10)).to_json() != a.to_json()

    def test_result_invariants(self):
        r = run_session(SessionConfig(UStarGate(3), EveStrategy.from_bases(["z", "x", "z"]), 5000, seed=4))
        assert r.sifted_length <= 3 * 5000
        assert 0 <= r.estimated_qber <= 1
        assert r.sifted_counts.sum() == r.sifted_length and r.flip_counts.sum() == r.errors
        data = json.loads(r.to_json())
        assert data["sifted_length"] == r.sifted_length and len(data["flip_counts"]) == 3

    def test_sifted_fraction(self):
        n, groups = 2, 20_000
        r = run_session(SessionConfig(UStarGate(n), None, groups, seed=5))
        total = n * groups
        sigma = math.sqrt(0.25 / total)
        assert abs(r.sifted_length / total - 0.5) <= 3 * sigma

    def test_partial_xi(self):
        strat = EveStrategy.from_bases(["z"], xi=0.4)
        r = run_session(SessionConfig(IdentityGate(1), strat, 50_000, seed=6))
        report = compare_with_analytic(r, enumerate_attack(IdentityGate(1), strat), xi=0.4)
        assert report.qber_exact == pytest.approx(0.1)
        assert report.passed()
        assert 0.3 * 50_000 < r.cell_counts.sum() < 0.5 * 50_000

    def test_interleaving_does_not_change_statistics(self):
        base = SessionConfig(UStarGate(2), EveStrategy.from_bases(["z", "z"]), 3000, seed=7)
        deep = SessionConfig(UStarGate(2), EveStrategy.from_bases(["z", "z"]), 3000, interleave_depth=4, seed=7)
        assert run_session(base).summary() == run_session(deep).summary()

    def test_channel_hook(self):
        seen = []

        def channel(msg: QubitMessage) -> QubitMessage:
            seen.append((msg.group_id, msg.qubit_index))
            return msg

        run_session(SessionConfig(UStarGate(2), None, 5, channel=channel))
        assert sorted(seen) == [(g, q) for g in range(5) for q in range(2)]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SessionConfig(UStarGate(2), None, 0)
        with pytest.raises(ValueError):
            SessionConfig(UStarGate(2), None, 10, interleave_depth=0)
        with pytest.raises(ValueError):
            SessionConfig(UStarGate(2), EveStrategy.from_bases(["z"], [2]), 10)


class TestTrace:
    def test_depth_one_serial(self):
        events = interleaving_trace(SessionConfig(UStarGate(2), None, 2, interleave_depth=1))
        assert serial(events) == [("send", 0, 0), ("ack", 0, 0), ("send", 0, 1), ("ack", 0, 1),
                                  ("send", 1, 0), ("ack", 1, 0), ("send", 1, 1), ("ack", 1, 1)]

    def test_depth_two_interleaves(self):
        events = interleaving_trace(SessionConfig(UStarGate(2), None, 4, interleave_depth=2))
        order = serial(events)
        first_ack = order.index(("ack", 0, 0))
        assert order.index(("send", 1, 0)) < first_ack

    @pytest.mark.parametrize("depth", [1, 2, 3, 5])
    def test_ack_before_next_send(self, depth):
        events = interleaving_trace(SessionConfig(UStarGate(3), EveStrategy.from_bases(["z"]), 20,
                                                  interleave_depth=depth, seed=depth))
        acked = set()
        sends = set()
        for e in events:
            g, q = e["group"], e["qubit"]
            if e["event"] == "send":
                assert (g, q) not in sends
                sends.add((g, q))
                if q > 0:
                    assert (g, q - 1) in acked
            elif e["event"] == "ack":
                assert (g, q) in sends
                acked.add((g, q))
        assert len(sends) == 60 and acked == sends
        assert [e["t"] for e in events] == sorted(e["t"] for e in events)
        assert sum(e["event"] == "complete" for e in events) == 20

    def test_idle_slots_vanish_with_depth(self):
        # round trip is two ticks, one send per tick: two groups in flight fill the channel
        idle = {d: idle_slots(interleaving_trace(SessionConfig(UStarGate(2), None, 10, interleave_depth=d)))
                for d in (1, 2, 3)}
        assert idle[1] > 0 and idle[2] == 0 and idle[3] == 0

    def test_schema(self):
        events = interleaving_trace(SessionConfig(UStarGate(2), None, 1))
        assert all(set(e) == {"t", "event", "group", "qubit"} for e in events)
        r = run_session(SessionConfig(UStarGate(2), None, 2, record_events=True))
        lines = r.events_jsonl().splitlines()
        assert [json.loads(line) for line in lines] == r.events


class TestCompare:
    @pytest.mark.parametrize("gate,strategy", [
        (IdentityGate(2), EveStrategy.from_bases(["z", "z"])),
        (UStarGate(2), EveStrategy.from_bases(["z", "z"])),
        (CartanGate(C_STAR), OPTIMAL),
        (UStarGate(3), EveStrategy.from_bases(["x", "y"], [0, 2])),
    ])
    def test_agreement(self, gate, strategy):
        report = compare_with_analytic(SessionConfig(gate, strategy, 100_000, seed=11))
        assert report.passed(4.0), report.max_abs_z
        assert len(report.cell_z) > 0

    def test_no_eve(self):
        report = compare_with_analytic(SessionConfig(UStarGate(2), None, 1000))
        assert report.qber_empirical == 0.0 and report.qber_exact == pytest.approx(0.0, abs=1e-15)
        assert report.max_abs_z == 0.0

    def test_info_proxy(self):
        r = run_session(SessionConfig(IdentityGate(1), EveStrategy.from_bases(["z"]), 100_000, seed=12))
        assert r.eve_empirical_info_proxy == pytest.approx(0.5, abs=0.01)

    def test_result_needs_outcome(self):
        r = run_session(SessionConfig(UStarGate(2), None, 10))
        with pytest.raises(ValueError):
            compare_with_analytic(r)

    def test_plugin_information(self):
        counts = np.zeros((2, 2, 2))
        counts[0] = [[50, 0], [0, 50]]
        counts[1] = [[25, 25], [25, 25]]
        assert plugin_information(counts, 1) == pytest.approx(0.5)
        assert plugin_information(np.zeros((1, 2, 1)), 1) == 0.0

    @pytest.mark.slow
    def test_convergence_rate(self):
        # the QBER error shrinks like 1/sqrt(n): the log-log slope of the mean error is near -1/2
        strategy = EveStrategy.from_bases(["z"])
        sizes = [1000, 10_000, 100_000]
        errs = []
        for n in sizes:
            e = [abs(run_session(SessionConfig(IdentityGate(1), strategy, n, seed=s)).estimated_qber - 0.25)
                 for s in range(8)]
            errs.append(np.sqrt(np.mean(np.square(e))))
        slope = np.polyfit(np.log10(sizes), np.log10(errs), 1)[0]
        assert -0.75 < slope < -0.25
