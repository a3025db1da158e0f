import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entqkd.gates import (C_STAR, SIGMA_X, SIGMA_Y, SIGMA_Z, CartanGate, CartanParams, ExplicitGate, IdentityGate,
                          Parity, UStarGate, basis_state, cartan_gate, eve_premeasure_gate, format_angle,
                          parse_angle, parse_gate, product_state, resolve, rotation, u_star,
                          u_star_parity_expansion, word_coefficients, word_operator)
from entqkd.linalg import equal_up_to_phase, is_unitary, tensor

import oracle

SQ2 = math.sqrt(2)
angles = st.floats(-10, 10, allow_nan=False)


def all_signs(n):
    return ["".join(s) for s in itertools.product("+-", repeat=n - 1)]


class TestBasisStates:
    def test_values(self):
        assert np.allclose(basis_state(0, "z"), [1, 0])
        assert np.allclose(basis_state(1, "z"), [0, 1])
        assert np.allclose(basis_state(0, "x"), [1 / SQ2, 1 / SQ2])
        assert np.allclose(basis_state(1, "x"), [1 / SQ2, -1 / SQ2])

    def test_orthonormal(self):
        assert abs(np.vdot(basis_state(0, "x"), basis_state(1, "x"))) < 1e-15

    def test_errors(self):
        with pytest.raises(ValueError):
            basis_state(0, "y")
        with pytest.raises(ValueError):
            product_state("01", "z")


class TestRotations:
    def test_zero(self):
        assert np.allclose(rotation("y", 0), np.eye(2))

    def test_y_pi_flips(self):
        assert equal_up_to_phase(rotation("y", math.pi) @ basis_state(0, "z"), basis_state(1, "z"))

    @given(angles)
    def test_z_keeps_zero(self, g):
        assert equal_up_to_phase(rotation("z", g) @ basis_state(0, "z"), basis_state(0, "z"))

    def test_eve_gate_identity(self):
        assert np.allclose(eve_premeasure_gate(0, 0), np.eye(2))

    def test_eve_gate_x_measurement(self):
        k = eve_premeasure_gate(math.pi / 2, 0)
        observable = k.conj().T @ SIGMA_Z @ k
        assert np.allclose(observable, SIGMA_X) or np.allclose(observable, -SIGMA_X)

    def test_eve_gate_matches_oracle(self):
        for b, g in [(math.pi / 8, 0), (math.pi / 2, math.pi / 2), (1.1, -2.3)]:
            assert np.allclose(eve_premeasure_gate(b, g), oracle.eve_rotation(b, g))

    @given(angles, angles)
    def test_unitary(self, b, g):
        assert is_unitary(eve_premeasure_gate(b, g), atol=1e-12)

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            rotation("x", 1.0)


class TestCartan:
    def test_zero_is_identity(self):
        assert np.allclose(cartan_gate((0, 0, 0)), np.eye(4))

    def test_equals_ustar2(self):
        expected = (np.eye(4) + 1j * tensor(SIGMA_Y, SIGMA_Y)) / SQ2
        assert np.allclose(cartan_gate((0, math.pi / 2, 0)), expected, atol=1e-12)
        assert np.allclose(cartan_gate((0, math.pi / 2, 0)), u_star(2, Parity.EVEN, "+"), atol=1e-12)

    @given(angles, angles, angles)
    def test_matches_expm(self, c1, c2, c3):
        assert np.allclose(cartan_gate((c1, c2, c3)), oracle.cartan(c1, c2, c3), atol=1e-12)

    def test_unitary_random(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            assert is_unitary(cartan_gate(rng.uniform(0, 2 * math.pi, 3)), atol=1e-12)

    @given(angles, angles, angles)
    def test_inverse(self, c1, c2, c3):
        assert np.allclose(cartan_gate((c1, c2, c3)) @ cartan_gate((-c1, -c2, -c3)), np.eye(4), atol=1e-12)

    def test_params_canonical(self):
        p = CartanParams(-math.pi, 7.0, 0.0)
        assert 0 <= p.c1 < 2 * math.pi and p.c2 == pytest.approx(7.0 - 2 * math.pi)
        with pytest.raises(ValueError):
            CartanParams(float("nan"), 0, 0)

    def test_c_star(self):
        assert C_STAR.as_tuple() == pytest.approx((math.pi / 32, 3 * math.pi / 8, math.pi / 32))


class TestUStar:
    def test_base_cases(self):
        assert np.allclose(u_star(1, Parity.EVEN, ""), np.eye(2))
        assert np.allclose(u_star(1, Parity.ODD, ""), SIGMA_Y)

    def test_two_even(self):
        assert np.allclose(u_star(2), (np.eye(4) + 1j * tensor(SIGMA_Y, SIGMA_Y)) / SQ2)

    def test_two_odd_action(self):
        u = u_star(2, Parity.ODD, "+")
        for a1, a2, b1, b2 in itertools.product((0, 1), (0, 1), "zx", "zx"):
            out = u @ tensor(basis_state(a1, b1), basis_state(a2, b2))
            # each sigma_y application may add a phase: compare up to per-term phases
            t1 = tensor(basis_state(a1, b1), basis_state(1 - a2, b2))
            t2 = tensor(basis_state(1 - a1, b1), basis_state(a2, b2))
            c1, c2 = np.vdot(t1, out), np.vdot(t2, out)
            assert abs(c1) == pytest.approx(1 / SQ2) and abs(c2) == pytest.approx(1 / SQ2)
            assert np.allclose(c1 * t1 + c2 * t2, out)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_unitary_all_variants(self, n):
        for parity in Parity:
            for signs in all_signs(n):
                assert is_unitary(u_star(n, parity, signs), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_entries_quantized(self, n):
        scale = 1 / math.sqrt(2 ** (n - 1))
        allowed = np.array([0, scale, -scale, 1j * scale, -1j * scale])
        for parity in Parity:
            for signs in all_signs(n):
                u = u_star(n, parity, signs)
                dist = np.abs(u.ravel()[:, None] - allowed[None, :]).min(axis=1)
                assert dist.max() < 1e-12

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("parity", list(Parity))
    def test_permutation_changes_only_phases(self, n, parity):
        # permuting the encoded qubits gives the terms of the permuted input, each keeping its weight
        rng = np.random.default_rng(n)
        u = u_star(n, parity)
        words = u_star_parity_expansion(n, parity)
        weight = 1 / math.sqrt(2 ** (n - 1))
        for perm in itertools.permutations(range(n)):
            bits = rng.integers(0, 2, n)
            bases = rng.choice(["z", "x"], n)
            out = np.transpose((u @ product_state(bits, bases)).reshape((2,) * n), perm).ravel()
            start = product_state(bits[list(perm)], bases[list(perm)])
            terms = np.array([word_operator(w) @ start for w in words])
            coeffs = terms.conj() @ out
            assert np.allclose(np.abs(coeffs), weight, atol=1e-12)
            assert np.allclose(coeffs @ terms, out, atol=1e-12)

    def test_permutation_z_inputs_computational(self):
        u = u_star(3)
        for bits in itertools.product((0, 1), repeat=3):
            state = u @ product_state(bits, "zzz")
            for perm in itertools.permutations(range(3)):
                permuted = np.transpose(state.reshape(2, 2, 2), perm).ravel()
                direct = u @ product_state([bits[k] for k in perm], "zzz")
                assert np.allclose(np.abs(permuted), np.abs(direct), atol=1e-12)

    def test_bad_signs(self):
        with pytest.raises(ValueError):
            u_star(3, Parity.EVEN, "+")
        with pytest.raises(ValueError):
            u_star(2, Parity.EVEN, "*")


class TestParityExpansion:
    def test_two(self):
        assert sorted(u_star_parity_expansion(2, Parity.EVEN)) == ["II", "YY"]
        assert sorted(u_star_parity_expansion(2, Parity.ODD)) == ["IY", "YI"]

    def test_three_even(self):
        assert sorted(u_star_parity_expansion(3, Parity.EVEN)) == ["III", "IYY", "YIY", "YYI"]

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_counts(self, n):
        for parity in Parity:
            assert len(u_star_parity_expansion(n, parity)) == 2 ** (n - 1)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_wrong_parity_words_vanish(self, n):
        for parity in Parity:
            coeffs = word_coefficients(u_star(n, parity))
            allowed = set(u_star_parity_expansion(n, parity))
            for word, c in coeffs.items():
                if word not in allowed:
                    assert abs(c) < 1e-12

    def test_word_operator(self):
        assert np.allclose(word_operator("IY"), tensor(np.eye(2), SIGMA_Y))


class TestGateSpecs:
    def test_resolve(self):
        assert np.allclose(resolve(IdentityGate(2)), np.eye(4))
        assert resolve(UStarGate(3, Parity.EVEN, "++")).shape == (8, 8)
        assert np.allclose(resolve(CartanGate(C_STAR)), cartan_gate(C_STAR))

    def test_local_layer(self):
        k = eve_premeasure_gate(0.3, 1.2)
        u = resolve(CartanGate(C_STAR, (0.3, 1.2)))
        assert np.allclose(u, cartan_gate(C_STAR) @ np.kron(k, k))

    def test_explicit(self):
        assert np.allclose(resolve(ExplicitGate(SIGMA_X)), SIGMA_X)
        with pytest.raises(ValueError):
            ExplicitGate(np.ones((2, 2)))
        with pytest.raises(ValueError):
            ExplicitGate(SIGMA_X).to_text()

    @pytest.mark.parametrize("text", ["identity:2", "cartan:0.0981747704,1.1780972451,0.0981747704",
                                      "ustar:3:even:++", "ustar:2:odd:-", "cartan:0.1000000000,0.2000000000,0.3000000000:0.4000000000,0.5000000000"])
    def test_text_round_trip(self, text):
        assert parse_gate(text).to_text() == text

    def test_shorthands(self):
        assert parse_gate("ustar:3") == UStarGate(3, Parity.EVEN, "++")
        g = parse_gate("cartan:pi/32,3pi/8,pi/32")
        assert np.allclose(g.params.as_tuple(), C_STAR.as_tuple(), atol=1e-15)
        assert parse_gate("cartan:c*").params == C_STAR

    @given(st.floats(0, 2 * math.pi, allow_nan=False, exclude_max=True))
    def test_angle_round_trip(self, x):
        assert abs(parse_angle(format_angle(x)) - x) < 1e-9

    @pytest.mark.parametrize("text,value", [("pi", math.pi), ("-pi/2", -math.pi / 2), ("3pi/8", 3 * math.pi / 8),
                                            ("3*pi/8", 3 * math.pi / 8), ("0.25", 0.25)])
    def test_parse_angle(self, text, value):
        assert parse_angle(text) == value

    @pytest.mark.parametrize("text", ["", "foo", "identity", "identity:x", "cartan:1,2", "ustar:2:weird",
                                      "ustar:3:even:+", "cartan:1,2,3:4", "identity:0"])
    def test_bad_specs(self, text):
        with pytest.raises(ValueError):
            parse_gate(text)

    @pytest.mark.parametrize("text", ["nan", "inf", "pi/x", "abc"])
    def test_bad_angles(self, text):
        with pytest.raises(ValueError):
            parse_angle(text)
