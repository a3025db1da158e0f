import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entqkd.gates import HADAMARD, SIGMA_X, SIGMA_Y, SIGMA_Z, basis_state, u_star
from entqkd.linalg import (apply, apply_on_qubit, equal_up_to_phase, is_unitary, marginal_flip_probability,
                           measure_qubit_z, num_qubits, random_state, random_unitary, tensor)

I2 = np.eye(2)
seeds = st.integers(0, 2**32 - 1)


class TestTensor:
    def test_identity(self):
        assert np.array_equal(tensor(I2, I2), np.eye(4))

    def test_yy_entries(self):
        yy = tensor(SIGMA_Y, SIGMA_Y)
        expected = np.zeros((4, 4))
        expected[0, 3], expected[1, 2], expected[2, 1], expected[3, 0] = -1, 1, 1, -1
        assert np.allclose(yy, expected, atol=0)

    def test_z_on_left(self):
        assert np.array_equal(tensor(SIGMA_Z, I2), np.diag([1, 1, -1, -1]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            tensor()


class TestApply:
    def test_identity(self):
        s = random_state(3, np.random.default_rng(1))
        assert np.allclose(apply(np.eye(8), s), s)

    @pytest.mark.parametrize("a", [0, 1])
    @pytest.mark.parametrize("alpha", ["z", "x"])
    def test_sigma_y_flips_bit(self, a, alpha):
        assert equal_up_to_phase(apply(SIGMA_Y, basis_state(a, alpha)), basis_state(1 - a, alpha))

    def test_sigma_x_on_zero(self):
        assert np.allclose(apply(SIGMA_X, basis_state(0, "z")), basis_state(1, "z"))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(np.eye(4), np.ones(2))

    def test_norm_preserved_many(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            out = apply(random_unitary(1 << n, rng), random_state(n, rng))
            assert abs(np.linalg.norm(out) - 1) < 1e-12


class TestApplyOnQubit:
    def test_y_on_first(self):
        s = tensor(basis_state(0, "z"), basis_state(0, "z"))
        expected = 1j * tensor(basis_state(1, "z"), basis_state(0, "z"))
        assert np.allclose(apply_on_qubit(SIGMA_Y, 0, s), expected)

    def test_identity_any_qubit(self):
        s = random_state(3, np.random.default_rng(2))
        for q in range(3):
            assert np.allclose(apply_on_qubit(I2, q, s), s)

    def test_locality(self):
        rng = np.random.default_rng(3)
        phi, psi = random_state(1, rng), random_state(1, rng)
        u = random_unitary(2, rng)
        assert np.allclose(apply_on_qubit(u, 1, tensor(phi, psi)), tensor(phi, u @ psi))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_on_qubit(I2, 2, np.ones(4) / 2)

    @given(seed=seeds, n=st.integers(1, 4), data=st.data())
    def test_matches_full_operator(self, seed, n, data):
        q = data.draw(st.integers(0, n - 1))
        rng = np.random.default_rng(seed)
        u, s = random_unitary(2, rng), random_state(n, rng)
        full = tensor(*[u if k == q else I2 for k in range(n)])
        assert np.allclose(apply_on_qubit(u, q, s), full @ s, atol=1e-12)


class TestMeasure:
    def test_eigenstate(self):
        zero, one = measure_qubit_z(0, basis_state(0, "z"))
        assert zero.probability == 1.0 and one.probability == 0.0
        assert np.linalg.norm(one.post_state) == pytest.approx(1.0)

    def test_plus_state(self):
        zero, one = measure_qubit_z(0, basis_state(0, "x"))
        assert zero.probability == pytest.approx(0.5) and one.probability == pytest.approx(0.5)

    def test_ustar2_first_qubit_uniform(self):
        u = u_star(2)
        for a1 in (0, 1):
            for a2 in (0, 1):
                for b1 in "zx":
                    for b2 in "zx":
                        s = u @ tensor(basis_state(a1, b1), basis_state(a2, b2))
                        zero, one = measure_qubit_z(0, s)
                        assert zero.probability == pytest.approx(0.5, abs=1e-12)
                        assert one.probability == pytest.approx(0.5, abs=1e-12)

    @given(seed=seeds, n=st.integers(1, 4), data=st.data())
    def test_completeness_and_normalization(self, seed, n, data):
        q = data.draw(st.integers(0, n - 1))
        branches = measure_qubit_z(q, random_state(n, np.random.default_rng(seed)))
        assert abs(sum(b.probability for b in branches) - 1) < 1e-12
        for b in branches:
            assert abs(np.linalg.norm(b.post_state) - 1) < 1e-12
            assert 0.0 <= b.probability <= 1.0


class TestFlipProbability:
    @pytest.mark.parametrize("a", [0, 1])
    @pytest.mark.parametrize("alpha", ["z", "x"])
    def test_eigenstate(self, a, alpha):
        assert marginal_flip_probability(0, alpha, a, basis_state(a, alpha)) == pytest.approx(0.0, abs=1e-15)

    def test_crossed_basis(self):
        assert marginal_flip_probability(0, "x", 0, basis_state(0, "z")) == pytest.approx(0.5)

    def test_bb84_resend(self):
        # Alice sends |0;x>, Eve measures z and resends |e;z>; Bob measures x
        flips = [0.5 * marginal_flip_probability(0, "x", 0, basis_state(e, "z")) for e in (0, 1)]
        assert sum(flips) == pytest.approx(0.5)

    def test_bad_basis(self):
        with pytest.raises(ValueError):
            marginal_flip_probability(0, "y", 0, basis_state(0, "z"))


class TestHelpers:
    def test_unbiased_bases(self):
        for a in (0, 1):
            for b in (0, 1):
                assert abs(np.vdot(basis_state(a, "z"), basis_state(b, "x"))) ** 2 == pytest.approx(0.5)

    def test_num_qubits(self):
        assert num_qubits(np.eye(8)) == 3
        with pytest.raises(ValueError):
            num_qubits(np.ones(3))

    def test_phase_equality(self):
        s = random_state(2, np.random.default_rng(4))
        assert equal_up_to_phase(np.exp(0.7j) * s, s)
        assert not equal_up_to_phase(s, np.roll(s, 1))

    def test_random_unitary(self):
        assert is_unitary(random_unitary(8, np.random.default_rng(5)), atol=1e-12)
        assert not is_unitary(np.ones((2, 2)))

    def test_hadamard_maps_z_to_x(self):
        assert np.allclose(HADAMARD @ SIGMA_Z @ HADAMARD, SIGMA_X)
        assert math.isclose(abs(np.linalg.det(HADAMARD)), 1.0)
