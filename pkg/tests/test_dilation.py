import dataclasses
import math

import numpy as np
import pytest

from lindblad_dilation import (
    DensityMatrix,
    be_norm,
    damped_qubit,
    dilate_by_order,
    dilate_generic,
    dilate_order1,
    dilate_order2,
    dilate_order2_compact,
    dilate_order3,
    first_column_residual,
    kraus_series,
    kraus_series_compact_order2,
    operator_norm,
    periodic_qubit,
    static_model,
    tfim_damping,
    tfim_driven,
)
from lindblad_dilation.dilation import _first_column, ancilla_qubits_for
from lindblad_dilation.kraus import KrausBlock
from lindblad_dilation.series import (
    HalfPowerSeries,
    exp_of_nilpotent_order,
    series_from_coeffs,
    series_scale,
)
from lindblad_dilation.models import SMINUS, SPLUS, SZ

from util import random_matrix, random_model


def scale_block_coeff(kset, block_index: int, factor: complex):
    """Copy of kset with one block's series multiplied by factor."""
    blocks = list(kset.blocks)
    b = blocks[block_index]
    blocks[block_index] = KrausBlock(b.block_index, b.family, series_scale(b.series, factor))
    return dataclasses.replace(kset, blocks=tuple(blocks))


class TestAncillaSizing:
    def test_qubit_counts(self):
        assert ancilla_qubits_for(1) == 1
        assert ancilla_qubits_for(2) == 1
        assert ancilla_qubits_for(5) == 3
        assert ancilla_qubits_for(8) == 3
        assert ancilla_qubits_for(9) == 4


class TestOrderOneForm:
    def test_damped_qubit_blocks(self):
        dt = 0.04
        dh = dilate_order1(damped_qubit(), 0.0, dt)
        assert dh.sys_dim == 2 and dh.num_blocks == 2 and dh.ancilla_qubits == 1
        assert np.allclose(dh.blocks[0], math.sqrt(dt) * SZ, atol=1e-14)
        assert np.allclose(dh.blocks[1], SMINUS, atol=1e-14)
        expected = np.zeros((4, 4), dtype=complex)
        expected[:2, :2] = math.sqrt(dt) * SZ
        expected[2:, :2] = SMINUS
        expected[:2, 2:] = SPLUS  # dagger of sigma_minus
        assert np.allclose(dh.assembled, expected, atol=1e-14)
        assert dh.dt == dt

    def test_second_order_diagonal_correction(self):
        # H_0 = sqrt(dt) H + dt^{3/2} X with X = diag(0, 1/6) for this model
        dt = 0.01
        dh = dilate_order2(damped_qubit(), 0.0, dt)
        x01 = (dh.blocks[0] / math.sqrt(dt) - SZ) / dt
        assert np.allclose(x01, np.diag([0.0, 1.0 / 6.0]), atol=1e-12)


class TestAssembledStructure:
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_hermitian_exactly_and_arrow_sparsity(self, k):
        dh = dilate_by_order(damped_qubit(), k, 0.0, 0.02)
        a = dh.assembled
        assert np.array_equal(a, a.conj().T)
        d = dh.sys_dim
        n_rows = a.shape[0] // d
        for r in range(1, n_rows):
            for c in range(1, n_rows):
                assert np.count_nonzero(a[r * d : (r + 1) * d, c * d : (c + 1) * d]) == 0

    def test_padding_blocks_exactly_zero(self):
        dh = dilate_order2(damped_qubit(), 0.0, 0.02)  # 5 blocks in an 8-row frame
        assert dh.num_blocks == 5 and dh.ancilla_qubits == 3
        d = dh.sys_dim
        assert np.count_nonzero(dh.assembled[5 * d :, :]) == 0
        assert np.count_nonzero(dh.assembled[:, 5 * d :]) == 0

    def test_block_norms_bounded_by_stability_scale(self):
        cases = [
            (damped_qubit(), 0.0),
            (periodic_qubit(), 0.3),
            (tfim_damping(m=2), 0.0),
            (tfim_driven(m=2), 0.2),
        ]
        for model, t in cases:
            be = be_norm(model, t)
            dt = 0.1 / be
            for k in (1, 2, 3):
                dh = dilate_by_order(model, k, t, dt)
                worst = max(operator_norm(b) for b in dh.blocks)
                assert worst <= 10.0 * be


class TestGenericMatchesExplicit:
    def agree(self, a, b, tol=1e-10):
        return np.linalg.norm(a.assembled - b.assembled) <= tol * max(
            1.0, np.linalg.norm(a.assembled)
        )

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_damped_qubit(self, k):
        m, dt = damped_qubit(), 0.02
        kset = kraus_series(m, 0.0, k)
        assert self.agree(dilate_generic(kset, dt), dilate_by_order(m, k, 0.0, dt))

    @pytest.mark.parametrize("k", [2, 3])
    def test_periodic_qubit(self, k):
        m, t, dt = periodic_qubit(), 0.3, 0.01
        kset = kraus_series(m, t, k)
        assert self.agree(dilate_generic(kset, dt), dilate_by_order(m, k, t, dt))

    def test_compact_set(self):
        m, dt = damped_qubit(), 0.02
        kset = kraus_series_compact_order2(m)
        assert self.agree(dilate_generic(kset, dt), dilate_order2_compact(m, dt))

    def test_two_jump_random_model(self):
        m, dt = random_model(6, dim=2, num_jumps=2), 0.02
        kset = kraus_series(m, 0.0, 3)
        assert self.agree(dilate_generic(kset, dt), dilate_order3(m, 0.0, dt))


class TestTruncationConsistency:
    def test_orders_two_and_three_share_low_coefficients(self):
        # the first two stages coincide, so blockwise differences shrink at
        # least as dt^2 (quartering dt cuts them by >= 16)
        m = damped_qubit()
        diffs = []
        for dt in (0.01, 0.0025):
            d2 = dilate_order2(m, 0.0, dt)
            d3 = dilate_order3(m, 0.0, dt)
            diffs.append(max(operator_norm(a - b) for a, b in zip(d2.blocks, d3.blocks)))
        assert diffs[0] > 1e-9  # the orders genuinely differ
        assert diffs[1] <= diffs[0] / 14.0


class TestFirstColumnSeries:
    def test_matches_full_matrix_exponential(self):
        # oracle: embed the arrow series in one big matrix series and
        # exponentiate that directly
        rng = np.random.default_rng(17)
        d, n_blocks, trunc = 2, 3, 5
        exp_blocks = []
        for b in range(n_blocks):
            entries = {p: random_matrix(rng, d, scale=0.7) for p in range(1, trunc + 1)}
            exp_blocks.append(series_from_coeffs(d, trunc, entries))
        big_dim = n_blocks * d
        big_coeffs = []
        for p in range(trunc + 1):
            c = np.zeros((big_dim, big_dim), dtype=complex)
            c[:d, :d] = exp_blocks[0].coeffs[p]
            for b in range(1, n_blocks):
                c[b * d : (b + 1) * d, :d] = exp_blocks[b].coeffs[p]
                c[:d, b * d : (b + 1) * d] = -exp_blocks[b].coeffs[p].conj().T
            big_coeffs.append(c)
        big = exp_of_nilpotent_order(HalfPowerSeries(big_dim, trunc, tuple(big_coeffs)))
        col = _first_column(exp_blocks, trunc)
        for b in range(n_blocks):
            for p in range(trunc + 1):
                want = big.coeffs[p][b * d : (b + 1) * d, :d]
                assert np.linalg.norm(col[b].coeffs[p] - want) <= 1e-12 * max(
                    1.0, np.linalg.norm(want)
                )


class TestFirstColumnResidual:
    def test_pure_hamiltonian_first_order_is_scalar_taylor_remainder(self):
        w = 0.7
        m = static_model(w * SZ, [])
        kset = kraus_series(m, 0.0, 1)
        for dt in (1e-2, 5e-3):
            dh = dilate_order1(m, 0.0, dt)
            expected = abs(np.exp(-1j * w * dt) - (1 - 1j * w * dt))
            assert first_column_residual(dh, kset, dt) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_halving_ratio_band_damped(self, k):
        m = damped_qubit()
        kset = kraus_series(m, 0.0, k)
        res = [
            first_column_residual(dilate_by_order(m, k, 0.0, dt), kset, dt)
            for dt in (1e-2, 5e-3)
        ]
        ratio = res[0] / res[1]
        ideal = 2.0 ** (k + 1)
        assert ideal / 1.5 <= ratio <= ideal * 1.5

    @pytest.mark.parametrize("k", [2, 3])
    def test_halving_ratio_band_periodic(self, k):
        m, t = periodic_qubit(), 0.3
        kset = kraus_series(m, t, k)
        res = [
            first_column_residual(dilate_by_order(m, k, t, dt), kset, dt)
            for dt in (1e-2, 5e-3)
        ]
        ratio = res[0] / res[1]
        ideal = 2.0 ** (k + 1)
        assert ideal / 1.5 <= ratio <= ideal * 1.5

    def test_dimension_mismatch_rejected(self):
        dh = dilate_order1(damped_qubit(), 0.0, 0.01)
        kset = kraus_series(random_model(2, dim=3), 0.0, 1)
        with pytest.raises(ValueError):
            first_column_residual(dh, kset, 0.01)


class TestFaultInjection:
    def test_non_trace_preserving_set_rejected(self):
        kset = kraus_series(damped_qubit(), 0.0, 2)
        broken = scale_block_coeff(kset, 1, 1.01)  # inflate the click block
        with pytest.raises(ValueError, match="not Hermitian"):
            dilate_generic(broken, 0.01)

    def test_bad_constant_block_rejected(self):
        kset = kraus_series(damped_qubit(), 0.0, 2)
        broken = scale_block_coeff(kset, 0, 1.5)  # constant coefficient now 1.5 I
        with pytest.raises(ValueError, match="constant coefficient"):
            dilate_generic(broken, 0.01)

    def test_valid_set_passes_the_same_gate(self):
        kset = kraus_series(damped_qubit(), 0.0, 2)
        dilate_generic(kset, 0.01)  # must not raise


class TestArgumentValidation:
    def test_nonpositive_dt_rejected(self):
        m = damped_qubit()
        for fn in (dilate_order1, dilate_order2, dilate_order3):
            with pytest.raises(ValueError):
                fn(m, 0.0, 0.0)
        with pytest.raises(ValueError):
            dilate_order2_compact(m, -0.01)
        with pytest.raises(ValueError):
            dilate_generic(kraus_series(m, 0.0, 1), 0.0)

    def test_unknown_order_rejected(self):
        with pytest.raises(ValueError):
            dilate_by_order(damped_qubit(), 5, 0.0, 0.01)
