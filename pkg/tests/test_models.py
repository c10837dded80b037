import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lindblad_dilation import (
    be_norm,
    damped_qubit,
    effective_drift,
    finite_difference_model,
    periodic_qubit,
    site_operator,
    static_model,
    tfim_damping,
    tfim_driven,
)
from lindblad_dilation.models import SMINUS, SPLUS, SX, SY, SZ, _tfim_hamiltonian

from util import random_hermitian

# dense-eigensolver value for the 4-site ring at g=1, frozen as the oracle
TFIM_M4_G1_GROUND_ENERGY = -5.226251859505501
TFIM_M4_G1_OPNORM = 5.22625185950551


class TestEffectiveDrift:
    def test_identity_jump_gives_minus_half_identity(self):
        m = static_model(np.zeros((2, 2)), [np.eye(2)])
        assert np.allclose(effective_drift(m, 0.0), -0.5 * np.eye(2))

    def test_pure_hamiltonian_gives_minus_i_h(self):
        m = static_model(SZ, [])
        assert np.allclose(effective_drift(m, 0.0), -1j * SZ)

    def test_matches_hand_summation_on_tfim(self):
        m = tfim_damping()
        expected = -1j * m.hamiltonian(0.0)
        for j in range(1, m.num_jumps + 1):
            v = m.jump(j, 0.0)
            expected = expected - 0.5 * (v.conj().T @ v)
        assert np.allclose(effective_drift(m, 0.0), expected)

    @given(st.integers(0, 10_000))
    def test_antihermitian_part_is_decay(self, seed):
        rng = np.random.default_rng(seed)
        h = random_hermitian(rng, 3)
        vs = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))]
        m = static_model(h, vs)
        v0 = effective_drift(m, 0.0)
        decay = sum(v.conj().T @ v for v in vs)
        assert np.linalg.norm(v0 + v0.conj().T + decay) <= 1e-12 * max(1.0, np.linalg.norm(decay))


class TestBeNorm:
    def test_unit_qubit_model(self):
        assert be_norm(static_model(SZ, [SMINUS]), 0.0) == pytest.approx(3.0, abs=1e-12)

    def test_empty_model(self):
        assert be_norm(static_model(np.zeros((2, 2)), []), 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_tfim_value_from_eigensolver(self):
        assert be_norm(tfim_damping(), 0.0) == pytest.approx(1.0 + TFIM_M4_G1_OPNORM + 0.4, abs=1e-9)


class TestTfimDamping:
    def test_shape_and_hermiticity(self):
        m = tfim_damping()
        assert m.dim == 16 and m.num_jumps == 4 and not m.time_dependent
        h = m.hamiltonian(0.0)
        assert np.linalg.norm(h - h.conj().T) <= 1e-12 * np.linalg.norm(h)

    def test_jumps_are_site_lowering_operators(self):
        m = tfim_damping(m=3, gamma=0.25)
        for j in range(1, 4):
            v = m.jump(j, 0.0)
            expected = 0.5 * (site_operator(SX, j, 3) - 1j * site_operator(SY, j, 3))
            assert np.allclose(v, 0.5 * expected)  # sqrt(0.25) = 0.5
            vdv = v.conj().T @ v
            # gamma times the projector onto site j excited: idempotent up to gamma
            assert np.linalg.matrix_rank(vdv) == 4
            assert np.allclose(vdv @ vdv, 0.25 * vdv)

    def test_ground_energy_matches_frozen_eigensolver_value(self):
        w = np.linalg.eigvalsh(tfim_damping().hamiltonian(0.0))
        assert w[0] == pytest.approx(TFIM_M4_G1_GROUND_ENERGY, abs=1e-9)

    def test_requires_two_sites(self):
        with pytest.raises(ValueError):
            tfim_damping(m=1)


class TestTfimDriven:
    def test_slope_normalization(self):
        m = tfim_driven(m=2)
        h0 = m.hamiltonian(0.0)
        h1 = m.hamiltonian(1.0)
        slope = h1 - h0
        assert np.linalg.norm(slope - slope.conj().T) <= 1e-12 * np.linalg.norm(slope)
        assert np.linalg.svd(slope, compute_uv=False)[0] == pytest.approx(1.0, abs=1e-12)
        for j in (1, 2):
            vdot = m.jump_dot(j, 0.0)
            assert np.linalg.svd(vdot, compute_uv=False)[0] == pytest.approx(1.0, abs=1e-12)

    def test_seed_determinism(self):
        a, b = tfim_driven(seed=42), tfim_driven(seed=42)
        assert np.array_equal(a.hamiltonian(0.7), b.hamiltonian(0.7))
        assert np.array_equal(a.jump(2, 0.3), b.jump(2, 0.3))
        c = tfim_driven(seed=43)
        assert not np.array_equal(a.hamiltonian(0.7), c.hamiltonian(0.7))

    def test_hamiltonian_hermitian_at_sampled_times(self):
        m = tfim_driven()
        for t in (0.0, 0.5, 1.0):
            h = m.hamiltonian(t)
            assert np.linalg.norm(h - h.conj().T) <= 1e-12 * np.linalg.norm(h)

    def test_two_jump_channels(self):
        assert tfim_driven().num_jumps == 2


class TestPeriodicQubit:
    def test_values_at_time_zero(self):
        m = periodic_qubit()
        assert np.allclose(m.hamiltonian(0.0), 0.0)
        assert np.allclose(m.jump(1, 0.0), 2 * SPLUS)
        assert np.allclose(m.jump(2, 0.0), 3 * SMINUS)

    def test_jump_dot_vanishes_at_half_pi(self):
        m = periodic_qubit()
        assert np.linalg.norm(m.jump_dot(1, np.pi / 2)) <= 1e-15

    def test_derivatives_match_finite_differences(self):
        m = periodic_qubit()
        h1, h2 = 1e-5, 1e-4  # wider step for the second difference: roundoff ~ eps/h^2
        for t in (0.4, 2.0, 5.5):
            fd_h = (m.hamiltonian(t + h1) - m.hamiltonian(t - h1)) / (2 * h1)
            assert np.linalg.norm(fd_h - m.ham_dot(t)) <= 1e-8
            fd_hh = (m.hamiltonian(t + h2) - 2 * m.hamiltonian(t) + m.hamiltonian(t - h2)) / h2**2
            assert np.linalg.norm(fd_hh - m.ham_ddot(t)) <= 1e-6
            for j in (1, 2):
                fd_v = (m.jump(j, t + h1) - m.jump(j, t - h1)) / (2 * h1)
                assert np.linalg.norm(fd_v - m.jump_dot(j, t)) <= 1e-8
                fd_vv = (m.jump(j, t + h2) - 2 * m.jump(j, t) + m.jump(j, t - h2)) / h2**2
                assert np.linalg.norm(fd_vv - m.jump_ddot(j, t)) <= 1e-6


class TestModelInfrastructure:
    def test_time_independent_derivatives_are_zero(self):
        m = damped_qubit()
        assert not m.time_dependent
        assert np.allclose(m.ham_dot(3.0), 0.0)
        assert np.allclose(m.ham_ddot(3.0), 0.0)
        assert np.allclose(m.jump_dot(1, 3.0), 0.0)
        assert np.allclose(m.jump_ddot(1, 3.0), 0.0)

    def test_hamiltonian_hermitian_at_random_times(self):
        rng = np.random.default_rng(14)
        for m in (tfim_damping(m=2), tfim_driven(m=2), periodic_qubit(), damped_qubit()):
            for t in rng.uniform(0, 10, size=100):
                h = m.hamiltonian(float(t))
                assert np.linalg.norm(h - h.conj().T) <= 1e-12 * max(1.0, np.linalg.norm(h))

    def test_finite_difference_model_first_derivative(self):
        analytic = periodic_qubit()
        fd = finite_difference_model(
            2, 2, analytic.hamiltonian, lambda j, t: analytic.jump(j, t)
        )
        for t in (0.3, 1.7):
            assert np.linalg.norm(fd.ham_dot(t) - analytic.ham_dot(t)) <= 1e-7
            assert np.linalg.norm(fd.jump_dot(2, t) - analytic.jump_dot(2, t)) <= 1e-7


class TestSiteOperator:
    def test_site_one_is_leftmost_factor(self):
        z1 = site_operator(SZ, 1, 2)
        assert np.allclose(z1, np.kron(SZ, np.eye(2)))

    def test_last_site_is_rightmost_factor(self):
        z2 = site_operator(SZ, 2, 2)
        assert np.allclose(z2, np.kron(np.eye(2), SZ))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            site_operator(SZ, 3, 2)

    def test_tfim_m2_matrix(self):
        # ring of two sites doubles the single bond
        h = _tfim_hamiltonian(2, 1.0)
        expected = -2 * np.kron(SZ, SZ) - np.kron(SX, np.eye(2)) - np.kron(np.eye(2), SX)
        assert np.allclose(h, expected)
