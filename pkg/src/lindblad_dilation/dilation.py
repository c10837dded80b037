"""Dilated Hamiltonians: a Hermitian matrix on ancilla (x) system space whose
unitary, run for sqrt(dt) and compressed back through the ancilla vacuum,
reproduces a Kraus series set to its truncation order.

The matrix is an arrow shape: block H_0 on the (0,0) diagonal, H_j in column
0, H_j^dag in row 0, zero elsewhere. Matching the first block column of
exp(-i sqrt(dt) H~) against the Kraus blocks fixes every H_j order by order.

Two independent routes produce the coefficients:

  * the closed-form recursion (dilate_order1/2/3, dilate_order2_compact):
    each off-diagonal coefficient is the Kraus coefficient minus corrections
    by the vacuum-persistence series, and the diagonal coefficients follow
    printed polynomial formulas;
  * a numeric stage-by-stage matcher (dilate_generic) that expands the
    exponential of the partially built arrow matrix as a formal series and
    solves for one coefficient per block per stage.

Both use the same uniform stage depth q = 0..k-1 for every block family,
with Kraus targets past a family's truncation treated as zero. The solved
diagonal coefficients must come out Hermitian; that is asserted, not
assumed, since it fails exactly when the input Kraus set is not
trace-preserving to the claimed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kraus import (
    KrausSeriesSet,
    family_kind,
    kraus_series,
    kraus_series_compact_order2,
)
from .linalg import expm_hermitian, operator_norm
from .models import LindbladModel
from .series import (
    HalfPowerSeries,
    evaluate,
    identity_series,
    series_add,
    series_dagger,
    series_from_coeffs,
    series_mul,
    series_scale,
    zero_series,
)

DIAGONAL_HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class DilatedHamiltonian:
    sys_dim: int
    num_blocks: int  # S_k + 1
    ancilla_qubits: int
    blocks: tuple  # H_0 .. H_{S_k}, evaluated at dt
    assembled: np.ndarray  # Hermitian, dim 2**ancilla_qubits * sys_dim
    dt: float


def ancilla_qubits_for(num_blocks: int) -> int:
    return max(1, math.ceil(math.log2(num_blocks)))


def _assemble(sys_dim: int, block_mats: list, dt: float) -> DilatedHamiltonian:
    n_blocks = len(block_mats)
    a = ancilla_qubits_for(n_blocks)
    full = np.zeros((2**a * sys_dim, 2**a * sys_dim), dtype=np.complex128)
    d = sys_dim
    h0 = block_mats[0]
    full[:d, :d] = (h0 + h0.conj().T) / 2  # scrub float dust; Hermiticity was asserted
    for b in range(1, n_blocks):
        full[b * d : (b + 1) * d, :d] = block_mats[b]
        full[:d, b * d : (b + 1) * d] = block_mats[b].conj().T
    return DilatedHamiltonian(
        sys_dim=sys_dim,
        num_blocks=n_blocks,
        ancilla_qubits=a,
        blocks=tuple(block_mats),
        assembled=full,
        dt=dt,
    )


def _check_diagonal_hermitian(x: np.ndarray, stage: int) -> np.ndarray:
    defect = np.linalg.norm(x - x.conj().T)
    if defect > DIAGONAL_HERMITICITY_TOL * max(1.0, np.linalg.norm(x)):
        raise ValueError(
            f"diagonal dilation coefficient at stage {stage} is not Hermitian "
            f"(defect {defect:.3e}); the input Kraus set is not trace-preserving "
            f"to the requested order"
        )
    return (x + x.conj().T) / 2


def _target_slots(kset: KrausSeriesSet) -> list:
    """Per block: (kind, [Y_q for q = 0..k-1]) with zero-extension.

    Slot q of the phase-free Kraus series sits at half-power 2q+2 for
    integer-power families (and the diagonal) and 2q+1 for half-power
    families.
    """
    k = kset.order
    d = kset.sys_dim
    zero = np.zeros((d, d), dtype=np.complex128)
    out = []
    for b in kset.blocks:
        kind = family_kind(b.family)
        slots = []
        for q in range(k):
            hp = 2 * q + 2 if kind in ("diag", "integer") else 2 * q + 1
            c = b.series.coeffs[hp] if hp <= b.series.max_half_power else zero
            slots.append(c)
        out.append((kind, slots))
    return out


def _explicit_coefficients(kset: KrausSeriesSet) -> list:
    """Closed-form recursion for the dilation coefficients X_{b,q}.

    Off-diagonal blocks: X_q = Y_q - sum_{i>=1} X_{q-i} Z_i, where Z_i are
    the vacuum-persistence corrections. The diagonal block follows the
    printed polynomial formulas in the gram accumulants
    Q_l = sum_j (H_j^dag H_j)[dt^l]. Returns [(kind, [X_0..X_{k-1}]), ...].
    """
    k = kset.order
    d = kset.sys_dim
    targets = _target_slots(kset)
    eye = np.eye(d, dtype=np.complex128)
    xs = [[] for _ in targets]
    persist = [eye]  # persist[i] multiplies dt^i in the vacuum-persistence series
    gram = []
    for q in range(k):
        for bi in range(1, len(targets)):
            _, slots = targets[bi]
            xq = slots[q]
            for i in range(1, q + 1):
                xq = xq - xs[bi][q - i] @ persist[i]
            xs[bi].append(xq)
        g = np.zeros((d, d), dtype=np.complex128)
        for bi in range(1, len(targets)):
            kind, _ = targets[bi]
            if kind == "half":
                for p in range(q + 1):
                    g = g + xs[bi][p].conj().T @ xs[bi][q - p]
            else:
                for p in range(q):
                    g = g + xs[bi][p].conj().T @ xs[bi][q - 1 - p]
        gram.append(g)

        y0 = targets[0][1]
        if q == 0:
            x0 = 1j * y0[0] + 0.5j * gram[0]  # equals H(t) for a valid set
        elif q == 1:
            x00 = xs[0][0]
            x0 = (
                1j * y0[1]
                + 0.5j * (gram[1] + x00 @ x00)
                - (1j / 24) * gram[0] @ gram[0]
                + (gram[0] @ x00 + x00 @ gram[0]) / 6
            )
        else:
            x00, x01 = xs[0][0], xs[0][1]
            q0, q1, q2 = gram
            x0 = (
                1j * y0[2]
                + 0.5j * (x00 @ x01 + x01 @ x00 + q2)
                + (x00 @ x00 @ x00 + q0 @ x01 + x01 @ q0 + q1 @ x00 + x00 @ q1) / 6
                - (1j / 24)
                * (q0 @ x00 @ x00 + x00 @ q0 @ x00 + x00 @ x00 @ q0 + q0 @ q1 + q1 @ q0)
                - (q0 @ x00 @ q0 + q0 @ q0 @ x00 + x00 @ q0 @ q0) / 120
                + (1j / 720) * q0 @ q0 @ q0
            )
        xs[0].append(_check_diagonal_hermitian(x0, q))

        if q == 0 and k > 1:
            persist.append(-0.5j * xs[0][0] - gram[0] / 6)
        elif q == 1 and k > 2:
            x00, x01 = xs[0][0], xs[0][1]
            persist.append(
                -0.5j * x01
                - (x00 @ x00) / 6
                - gram[1] / 6
                + (1j / 24) * (gram[0] @ x00 + x00 @ gram[0])
                + gram[0] @ gram[0] / 120
            )
    return [(kind, xs[bi]) for bi, (kind, _) in enumerate(targets)]


def block_series_from_coefficients(kset: KrausSeriesSet, coeffs: list) -> list:
    """Dilation block series from per-stage coefficients: half-power families
    carry X_q at dt^q, the diagonal and integer-power families at dt^{q+1/2}."""
    k = kset.order
    out = []
    for kind, xq in coeffs:
        entries = {}
        for q, x in enumerate(xq):
            hp = 2 * q if kind == "half" else 2 * q + 1
            entries[hp] = x
        out.append(series_from_coeffs(kset.sys_dim, 2 * k - 1, entries))
    return out


def _build_from_coefficients(kset: KrausSeriesSet, coeffs: list, dt: float) -> DilatedHamiltonian:
    mats = [evaluate(s, dt) for s in block_series_from_coefficients(kset, coeffs)]
    return _assemble(kset.sys_dim, mats, dt)


def dilate_order1(model: LindbladModel, t: float, dt: float) -> DilatedHamiltonian:
    """First-order dilation: H_0 = sqrt(dt) H, H_j = V_j."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    kset = kraus_series(model, t, 1)
    return _build_from_coefficients(kset, _explicit_coefficients(kset), dt)


def dilate_order2(model: LindbladModel, t: float, dt: float) -> DilatedHamiltonian:
    if dt <= 0:
        raise ValueError("dt must be positive")
    kset = kraus_series(model, t, 2)
    return _build_from_coefficients(kset, _explicit_coefficients(kset), dt)


def dilate_order3(model: LindbladModel, t: float, dt: float) -> DilatedHamiltonian:
    if dt <= 0:
        raise ValueError("dt must be positive")
    kset = kraus_series(model, t, 3)
    return _build_from_coefficients(kset, _explicit_coefficients(kset), dt)


def dilate_order2_compact(model: LindbladModel, dt: float) -> DilatedHamiltonian:
    """Second-order dilation over the compact pair-family Kraus set
    (time-independent models, J^2 + J + 1 blocks)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    kset = kraus_series_compact_order2(model)
    return _build_from_coefficients(kset, _explicit_coefficients(kset), dt)


def dilate_by_order(model: LindbladModel, k: int, t: float, dt: float) -> DilatedHamiltonian:
    if k == 1:
        return dilate_order1(model, t, dt)
    if k == 2:
        return dilate_order2(model, t, dt)
    if k == 3:
        return dilate_order3(model, t, dt)
    raise ValueError(f"order must be 1, 2 or 3, got {k}")


def _first_column(exp_blocks: list, trunc: int) -> list:
    """First block column of exp(E) for an arrow matrix E given by its first
    block column exp_blocks (E_{b,0}; row 0 holds -E_b^dag for b >= 1).

    Uses (E^n)_{b,0} = E_b (E^{n-1})_{0,0} for b >= 1 and
    (E^n)_{0,0} = E_0 (E^{n-1})_{0,0} - sum_b E_b^dag (E^{n-1})_{b,0}.
    """
    dim = exp_blocks[0].dim
    n_blocks = len(exp_blocks)
    daggers = [None] + [series_dagger(exp_blocks[b]) for b in range(1, n_blocks)]
    power = list(exp_blocks)  # E^1 first column
    col = [series_add(identity_series(dim, trunc), power[0])] + power[1:]
    for n in range(2, trunc + 1):
        new0 = series_mul(exp_blocks[0], power[0])
        for b in range(1, n_blocks):
            new0 = series_add(new0, series_scale(series_mul(daggers[b], power[b]), -1.0))
        power = [new0] + [series_mul(exp_blocks[b], power[0]) for b in range(1, n_blocks)]
        inv_fact = 1.0 / math.factorial(n)
        col = [series_add(c, series_scale(p, inv_fact)) for c, p in zip(col, power)]
    return col


def dilate_generic(kset: KrausSeriesSet, dt: float) -> DilatedHamiltonian:
    """Order-by-order numeric matcher: solve for the dilation coefficients by
    expanding exp(-i sqrt(dt) H~) as a formal series in sqrt(dt) and matching
    its first block column against the Kraus targets, one stage at a time.

    Within a stage, all off-diagonal coefficients decouple and are solved
    first; the diagonal coefficient then depends on them and must come out
    Hermitian (raises otherwise). Column matching targets are F_0 for the
    diagonal and -i F_b for off-diagonal blocks.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    d = kset.sys_dim
    k = kset.order
    const = kset.blocks[0].series.coeffs[0]
    if np.linalg.norm(const - np.eye(d)) > 1e-12:
        raise ValueError("block 0 must have constant coefficient I")
    trunc = 2 * k
    kinds = [family_kind(b.family) for b in kset.blocks]

    # matching targets as series up to trunc: F_0, then -i F_b
    targets = []
    for bi, b in enumerate(kset.blocks):
        ext = {p: c for p, c in enumerate(b.series.coeffs)}
        s = series_from_coeffs(d, trunc, ext)
        targets.append(s if bi == 0 else series_scale(s, -1j))

    exp_blocks = [zero_series(d, trunc) for _ in kset.blocks]

    def set_hp(bi: int, hp: int, value: np.ndarray):
        coeffs = list(exp_blocks[bi].coeffs)
        coeffs[hp] = value
        exp_blocks[bi] = HalfPowerSeries(d, trunc, tuple(coeffs))

    for stage in range(k):
        col = _first_column(exp_blocks, trunc)
        # the unknown enters the column linearly as -i X at its half-power,
        # so E_b[hp] = target - column_without_unknown
        for bi in range(1, len(exp_blocks)):
            hp = 2 * stage + 2 if kinds[bi] == "integer" else 2 * stage + 1
            set_hp(bi, hp, targets[bi].coeffs[hp] - col[bi].coeffs[hp])
        col = _first_column(exp_blocks, trunc)
        hp = 2 * stage + 2
        x0 = 1j * (targets[0].coeffs[hp] - col[0].coeffs[hp])
        set_hp(0, hp, -1j * _check_diagonal_hermitian(x0, stage))

    mats = []
    for bi, e in enumerate(exp_blocks):
        h_entries = {p - 1: 1j * c for p, c in enumerate(e.coeffs) if p >= 1}
        mats.append(evaluate(series_from_coeffs(d, trunc - 1, h_entries), dt))
    return _assemble(d, mats, dt)


def first_column_residual(dh: DilatedHamiltonian, kset: KrausSeriesSet, dt: float) -> float:
    """max_b || <b| exp(-i sqrt(dt) H~) |0> - F_b(dt) || over all block rows,
    padding rows included (their target is zero), with the -i phase applied
    to off-diagonal targets."""
    if dh.sys_dim != kset.sys_dim:
        raise ValueError("dimension mismatch between dilation and Kraus set")
    d = dh.sys_dim
    u = expm_hermitian(dh.assembled, math.sqrt(dt))
    n_rows = u.shape[0] // d
    worst = 0.0
    for b in range(n_rows):
        ub = u[b * d : (b + 1) * d, :d]
        if b == 0:
            target = evaluate(kset.blocks[0].series, dt)
        elif b < kset.num_blocks:
            target = -1j * evaluate(kset.blocks[b].series, dt)
        else:
            target = 0.0
        worst = max(worst, operator_norm(ub - target))
    return worst
