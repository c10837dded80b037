"""Order-k Kraus operator series for one Lindblad step.

A KrausSeriesSet holds the truncated expansion of every Kraus block in
powers of sqrt(dt), stored phase-free: the physical Kraus operator for an
off-diagonal block is -i times the stored series, a per-block phase that
cancels in F rho F^dag and in F^dag F. Block families:

    F0        the no-click block, I + V_0 dt + ...
    F1(j)     single click of channel j, sqrt(dt) V_j + ...
    F2(j)     the commutator correction ([V_0,V_j] - V_j')/sqrt(12) at dt^{3/2}
    F3(j,k,l) triple click V_j V_k V_l / sqrt(6) at dt^{3/2}
    F4(j,k)   double click V_j V_k / sqrt(2) at dt, plus its dt^2 correction

F1/F2/F3 carry half-integer powers of dt ("half-power" blocks), F0/F4
integer powers. The block-index layout packs them as

    F1 at j, F2 at j+J, F3 at j+kJ+lJ^2-J^2+J, F4 at j+kJ+J^3+J

so S_k = J^3 + J^2 + 2J off-diagonal blocks for k >= 2 and S_1 = J.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import DensityMatrix, operator_norm
from .models import LindbladModel, effective_drift
from .series import HalfPowerSeries, evaluate, series_from_coeffs


@dataclass(frozen=True)
class KrausBlock:
    block_index: int
    family: tuple  # ("F0",), ("F1", j), ("F2", j), ("F3", j, k, l), ("F4", j, k)
    series: HalfPowerSeries


@dataclass(frozen=True)
class KrausSeriesSet:
    sys_dim: int
    order: int
    blocks: tuple  # KrausBlock, ordered by block_index; index 0 is F0
    num_blocks: int
    num_half_power_blocks: int

    def evaluated(self, dt: float) -> np.ndarray:
        """All blocks evaluated at dt, stacked as (num_blocks, d, d)."""
        return np.stack([evaluate(b.series, dt) for b in self.blocks])


def family_kind(family: tuple) -> str:
    """Power structure of a block family: diag, half, or integer."""
    name = family[0]
    if name == "F0":
        return "diag"
    if name in ("F1", "F2", "F3"):
        return "half"
    if name == "F4":
        return "integer"
    raise ValueError(f"unknown family {family}")


def _make_set(sys_dim: int, order: int, blocks: list) -> KrausSeriesSet:
    blocks = sorted(blocks, key=lambda b: b.block_index)
    indices = [b.block_index for b in blocks]
    if indices != list(range(len(blocks))):
        raise ValueError(f"block indices not contiguous: {indices}")
    n_half = sum(1 for b in blocks if family_kind(b.family) == "half")
    return KrausSeriesSet(
        sys_dim=sys_dim,
        order=order,
        blocks=tuple(blocks),
        num_blocks=len(blocks),
        num_half_power_blocks=n_half,
    )


class _Derivatives:
    """Evaluates H, V_j and the drift V_0 with time derivatives at one t."""

    def __init__(self, model: LindbladModel, t: float, order: int):
        d = model.dim
        zero = np.zeros((d, d), dtype=np.complex128)
        self.h = np.asarray(model.hamiltonian(t), dtype=np.complex128)
        self.v = [np.asarray(model.jump(j, t), dtype=np.complex128)
                  for j in range(1, model.num_jumps + 1)]
        td = model.time_dependent
        self.h_dot = np.asarray(model.ham_dot(t), dtype=np.complex128) if td else zero
        self.h_ddot = np.asarray(model.ham_ddot(t), dtype=np.complex128) if td and order >= 3 else zero
        self.v_dot = [np.asarray(model.jump_dot(j, t), dtype=np.complex128) if td else zero
                      for j in range(1, model.num_jumps + 1)]
        self.v_ddot = [np.asarray(model.jump_ddot(j, t), dtype=np.complex128) if td and order >= 3 else zero
                       for j in range(1, model.num_jumps + 1)]
        self.v0 = effective_drift(model, t)
        self.v0_dot = self.h_dot * (-1j)
        for vj, vjd in zip(self.v, self.v_dot):
            self.v0_dot = self.v0_dot - 0.5 * (vjd.conj().T @ vj + vj.conj().T @ vjd)
        self.v0_ddot = self.h_ddot * (-1j)
        for vj, vjd, vjdd in zip(self.v, self.v_dot, self.v_ddot):
            self.v0_ddot = self.v0_ddot - 0.5 * (
                vjdd.conj().T @ vj + 2 * (vjd.conj().T @ vjd) + vj.conj().T @ vjdd
            )


def block_index_f1(j: int, num_jumps: int) -> int:
    return j


def block_index_f2(j: int, num_jumps: int) -> int:
    return j + num_jumps


def block_index_f3(j: int, k: int, l: int, num_jumps: int) -> int:
    jj = num_jumps
    return j + k * jj + l * jj**2 - jj**2 + jj


def block_index_f4(j: int, k: int, num_jumps: int) -> int:
    return j + k * num_jumps + num_jumps**3 + num_jumps


def kraus_series(model: LindbladModel, t: float, k: int) -> KrausSeriesSet:
    """Kraus expansion of one order-k Lindblad step, centred at time t.

    Truncations per family: F0 to dt^k, F1 to dt^{k-1/2}, F2/F3 a single
    dt^{3/2} coefficient, F4 to dt^2. Coefficients use the Taylor data of
    H and V_j at t; derivative terms vanish for time-independent models.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {k}")
    if model.derivative_order_available < k - 1:
        raise ValueError(
            f"order {k} needs derivatives up to order {k - 1}; model provides "
            f"{model.derivative_order_available}"
        )
    d, jj = model.dim, model.num_jumps
    dv = _Derivatives(model, t, k)
    v0, v0d = dv.v0, dv.v0_dot
    eye = np.eye(d, dtype=np.complex128)
    blocks = []

    # F0: integer powers up to dt^k
    f0 = {0: eye, 2: v0}
    if k >= 2:
        f0[4] = 0.5 * (v0 @ v0 + v0d)
    if k >= 3:
        f0[6] = (v0 @ v0 @ v0 + 2 * v0d @ v0 + v0 @ v0d + dv.v0_ddot) / 6
    blocks.append(KrausBlock(0, ("F0",), series_from_coeffs(d, 2 * k, f0)))

    # F1: half powers up to dt^{k-1/2}
    for j in range(1, jj + 1):
        vj, vjd = dv.v[j - 1], dv.v_dot[j - 1]
        f1 = {1: vj}
        if k >= 2:
            f1[3] = 0.5 * (vjd + vj @ v0 + v0 @ vj)
        if k >= 3:
            f1[5] = (
                v0 @ v0 @ vj + v0 @ vj @ v0 + vj @ v0 @ v0
                + 2 * v0d @ vj + v0 @ vjd + 2 * vjd @ v0 + vj @ v0d
                + dv.v_ddot[j - 1]
            ) / 6
        blocks.append(
            KrausBlock(block_index_f1(j, jj), ("F1", j), series_from_coeffs(d, 2 * k - 1, f1))
        )

    if k >= 2:
        for j in range(1, jj + 1):
            vj, vjd = dv.v[j - 1], dv.v_dot[j - 1]
            coeff = (v0 @ vj - vj @ v0 - vjd) / math.sqrt(12.0)
            blocks.append(
                KrausBlock(block_index_f2(j, jj), ("F2", j), series_from_coeffs(d, 3, {3: coeff}))
            )
        for j, kk, ll in itertools.product(range(1, jj + 1), repeat=3):
            coeff = dv.v[j - 1] @ dv.v[kk - 1] @ dv.v[ll - 1] / math.sqrt(6.0)
            blocks.append(
                KrausBlock(
                    block_index_f3(j, kk, ll, jj), ("F3", j, kk, ll),
                    series_from_coeffs(d, 3, {3: coeff}),
                )
            )
        for j, kk in itertools.product(range(1, jj + 1), repeat=2):
            vj, vk = dv.v[j - 1], dv.v[kk - 1]
            vjk = vj @ vk
            lead = vjk / math.sqrt(2.0)
            sub = (
                v0 @ vjk + vj @ v0 @ vk + vjk @ v0
                + 2 * dv.v_dot[j - 1] @ vk + vj @ dv.v_dot[kk - 1]
            ) * (math.sqrt(2.0) / 6.0)
            blocks.append(
                KrausBlock(
                    block_index_f4(j, kk, jj), ("F4", j, kk),
                    series_from_coeffs(d, 4, {2: lead, 4: sub}),
                )
            )
    return _make_set(d, k, blocks)


def kraus_series_compact_order2(model: LindbladModel) -> KrausSeriesSet:
    """Compact second-order set for time-independent models:
    F0 = I + V_0 dt + V_0^2 dt^2/2, F1 as in the full set, and a single
    pair family F4(j,k) = V_j V_k dt / sqrt(2) replacing F2/F3/F4."""
    if model.time_dependent:
        raise ValueError("compact order-2 set requires a time-independent model")
    d, jj = model.dim, model.num_jumps
    dv = _Derivatives(model, 0.0, 2)
    v0 = dv.v0
    eye = np.eye(d, dtype=np.complex128)
    blocks = [
        KrausBlock(0, ("F0",), series_from_coeffs(d, 4, {0: eye, 2: v0, 4: 0.5 * v0 @ v0}))
    ]
    for j in range(1, jj + 1):
        vj = dv.v[j - 1]
        blocks.append(
            KrausBlock(
                j, ("F1", j),
                series_from_coeffs(d, 3, {1: vj, 3: 0.5 * (vj @ v0 + v0 @ vj)}),
            )
        )
    for j, kk in itertools.product(range(1, jj + 1), repeat=2):
        coeff = dv.v[j - 1] @ dv.v[kk - 1] / math.sqrt(2.0)
        blocks.append(
            KrausBlock(j + kk * jj, ("F4", j, kk), series_from_coeffs(d, 2, {2: coeff}))
        )
    return _make_set(d, 2, blocks)


def apply_kraus(kset: KrausSeriesSet, dt: float, rho: DensityMatrix) -> np.ndarray:
    """sum_j F_j(dt) rho F_j(dt)^dag. Per-block phases cancel here."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = kset.evaluated(dt)
    return np.einsum("jab,bc,jdc->ad", f, rho.matrix, f.conj())


def trace_residual(kset: KrausSeriesSet, dt: float) -> float:
    """Operator norm of sum_j F_j^dag F_j - I, the trace-preservation defect."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = kset.evaluated(dt)
    gram = np.einsum("jba,jbc->ac", f.conj(), f)
    return operator_norm(gram - np.eye(kset.sys_dim))


def orthogonalize_covariance(cov: np.ndarray, eig_floor: float = 1e-12) -> tuple:
    """Factor a PSD covariance as coeff @ coeff.T with orthogonal columns.

    Eigendecomposition cov = Q diag(w) Q^T; columns of coeff are the
    eigenvector directions scaled by sqrt(w), restricted to w > eig_floor.
    Returns (coeff, active) with active flagging the kept directions in
    ascending-eigenvalue order. Raises on indefinite input.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"covariance must be square, got {cov.shape}")
    if np.abs(cov - cov.T).max() > 1e-10 * max(1.0, np.abs(cov).max()):
        raise ValueError("covariance must be symmetric")
    w, q = np.linalg.eigh((cov + cov.T) / 2)
    if w.min() < -eig_floor:
        raise ValueError(f"covariance is indefinite: eigenvalue {w.min():.3e}")
    active = w > eig_floor
    coeff = q[:, active] * np.sqrt(w[active])
    return coeff, active


def enumerate_multi_indices(k: int, num_jumps: int, drop_all_zero: bool = False) -> list:
    """All tuples over {0..J} of length 1..k in lexicographic order; with
    drop_all_zero, tuples consisting only of zeros are removed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = []
    for length in range(1, k + 1):
        out.extend(itertools.product(range(num_jumps + 1), repeat=length))
    if drop_all_zero:
        out = [t for t in out if any(x != 0 for x in t)]
    return sorted(out)
