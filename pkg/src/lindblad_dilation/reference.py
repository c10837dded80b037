"""Trusted classical oracle: the Lindblad generator and an RK4 integrator.

reference_solution doubles the RK4 resolution until two successive runs
agree to 1e-10 in trace norm, which makes the oracle's own accuracy explicit
instead of relying on a fixed "small enough" step.

Two equivalent RK4 paths exist: a vectorized-superoperator path for small
dimensions (the generator becomes a d^2 x d^2 matrix, applied as a matvec,
with all time-dependent evaluations precomputed in chunks) and a plain
matrix-form loop otherwise. Both apply the identical scheme and re-Hermitize
after every step; the choice depends only on the model, so results are
deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import DensityMatrix, hermitize, trace_norm
from .models import LindbladModel, peak_be_norm

REFERENCE_TOL = 1e-10
MAX_REFERENCE_STEPS = 2**20
_SUPEROP_STATIC_MAX_DIM = 32
_SUPEROP_DRIVEN_MAX_DIM = 8
_CHUNK_STEPS = 16384


def apply_lindbladian(model: LindbladModel, t: float, rho: DensityMatrix) -> np.ndarray:
    """-i[H, rho] + sum_j (V_j rho V_j^dag - {V_j^dag V_j, rho}/2)."""
    return _rhs(model.hamiltonian(t), model.jumps(t), rho.matrix)


def _rhs(h: np.ndarray, vs: list, rho: np.ndarray) -> np.ndarray:
    acc = -1j * (h @ rho - rho @ h)
    for v in vs:
        vr = v @ rho
        vdvr = v.conj().T @ vr  # V^dag V rho; its adjoint is rho V^dag V
        acc = acc + vr @ v.conj().T - 0.5 * (vdvr + vdvr.conj().T)
    return acc


def _batch_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, d = a.shape[0], a.shape[1]
    return (a[:, :, None, :, None] * b[:, None, :, None, :]).reshape(n, d * d, d * d)


def _superop_batch(hs: np.ndarray, vjs: list) -> np.ndarray:
    """Generator matrices L(t) acting on row-major vec(rho), batched over t."""
    n, d = hs.shape[0], hs.shape[1]
    eye = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d))
    out = -1j * (_batch_kron(hs, eye) - _batch_kron(eye, hs.transpose(0, 2, 1)))
    for vs in vjs:
        vdv = np.einsum("nba,nbc->nac", vs.conj(), vs)
        out += _batch_kron(vs, vs.conj())
        out -= 0.5 * (_batch_kron(vdv, eye) + _batch_kron(eye, vdv.transpose(0, 2, 1)))
    return out


def _eval_batch(fn, ts: np.ndarray, dim: int) -> np.ndarray:
    """fn over an array of times, falling back to a scalar loop."""
    try:
        out = np.asarray(fn(ts), dtype=np.complex128)
        if out.shape == ts.shape + (dim, dim):
            return out
    except (TypeError, ValueError, IndexError):
        pass
    return np.stack([np.asarray(fn(float(t)), dtype=np.complex128) for t in ts])


def _rk4_vec_steps(y: np.ndarray, ls: np.ndarray, h: float, d: int) -> np.ndarray:
    """Advance vec(rho) through len(ls)//2 steps; ls holds L at half-step times."""
    n_steps = (ls.shape[0] - 1) // 2
    for i in range(n_steps):
        a0, am, a1 = ls[2 * i], ls[2 * i + 1], ls[2 * i + 2]
        k1 = a0 @ y
        k2 = am @ (y + (h / 2) * k1)
        k3 = am @ (y + (h / 2) * k2)
        k4 = a1 @ (y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        m = y.reshape(d, d)
        y = ((m + m.conj().T) / 2).reshape(-1)
    return y


def _rk4_core(model, rho0: np.ndarray, t0: float, duration: float, n_steps: int,
              record_every: int = 0) -> tuple:
    """Shared RK4 driver. Returns (final_rho, records); records is a list of
    (step_index, rho) pairs when record_every > 0, else empty."""
    d = model.dim
    h = duration / n_steps
    records = []
    if record_every > 0:
        records.append((0, rho0.copy()))

    use_superop = (not model.time_dependent and d <= _SUPEROP_STATIC_MAX_DIM) or (
        model.time_dependent and d <= _SUPEROP_DRIVEN_MAX_DIM
    )

    if use_superop:
        y = rho0.reshape(-1).copy()
        if not model.time_dependent:
            l_const = _superop_batch(
                model.hamiltonian(t0)[None], [model.jump(j, t0)[None] for j in range(1, model.num_jumps + 1)]
            )[0]
            chunk = record_every if record_every > 0 else n_steps
            done = 0
            while done < n_steps:
                take = min(chunk, n_steps - done)
                y = _rk4_vec_steps(y, np.broadcast_to(l_const, (2 * take + 1, d * d, d * d)), h, d)
                done += take
                if record_every > 0 and done % record_every == 0:
                    records.append((done, y.reshape(d, d).copy()))
            return y.reshape(d, d), records
        # time-dependent: precompute generator on the half-step grid, chunked
        done = 0
        while done < n_steps:
            take = min(_CHUNK_STEPS, n_steps - done)
            if record_every > 0:
                take = min(take, record_every - done % record_every)
            ts = t0 + (h / 2) * np.arange(2 * done, 2 * (done + take) + 1)
            hs = _eval_batch(model.hamiltonian, ts, d)
            vjs = [
                _eval_batch(lambda tt, jj=j: model.jump(jj, tt), ts, d)
                for j in range(1, model.num_jumps + 1)
            ]
            y = _rk4_vec_steps(y, _superop_batch(hs, vjs), h, d)
            done += take
            if record_every > 0 and done % record_every == 0:
                records.append((done, y.reshape(d, d).copy()))
        return y.reshape(d, d), records

    # matrix-form loop
    rho = rho0.copy()
    if not model.time_dependent:
        h_mat = model.hamiltonian(t0)
        vs = model.jumps(t0)
        for i in range(n_steps):
            k1 = _rhs(h_mat, vs, rho)
            k2 = _rhs(h_mat, vs, rho + (h / 2) * k1)
            k3 = _rhs(h_mat, vs, rho + (h / 2) * k2)
            k4 = _rhs(h_mat, vs, rho + h * k3)
            rho = hermitize(rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4))
            if record_every > 0 and (i + 1) % record_every == 0:
                records.append((i + 1, rho.copy()))
        return rho, records
    for i in range(n_steps):
        t = t0 + i * h
        hm, vm = model.hamiltonian(t), model.jumps(t)
        hh, vh = model.hamiltonian(t + h / 2), model.jumps(t + h / 2)
        h1, v1 = model.hamiltonian(t + h), model.jumps(t + h)
        k1 = _rhs(hm, vm, rho)
        k2 = _rhs(hh, vh, rho + (h / 2) * k1)
        k3 = _rhs(hh, vh, rho + (h / 2) * k2)
        k4 = _rhs(h1, v1, rho + h * k3)
        rho = hermitize(rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4))
        if record_every > 0 and (i + 1) % record_every == 0:
            records.append((i + 1, rho.copy()))
    return rho, records


def rk4_evolve(model: LindbladModel, rho0: DensityMatrix, t0: float, duration: float,
               n_steps: int) -> DensityMatrix:
    """Classic RK4 on d rho/dt = L_t(rho) with per-step re-Hermitization."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    final, _ = _rk4_core(model, rho0.matrix, t0, duration, n_steps)
    return DensityMatrix(final)


def rk4_trajectory(model: LindbladModel, rho0: DensityMatrix, t0: float, duration: float,
                   n_steps: int, record_every: int) -> list:
    """RK4 run recording rho every record_every steps (including step 0).

    Returns a list of (step_index, matrix) pairs; record_every must divide
    n_steps so the final state is always included.
    """
    if n_steps % record_every != 0:
        raise ValueError("record_every must divide n_steps")
    _, records = _rk4_core(model, rho0.matrix, t0, duration, n_steps, record_every)
    return records


def reference_solution(model: LindbladModel, rho0: DensityMatrix, t0: float,
                       duration: float, tol: float = REFERENCE_TOL) -> DensityMatrix:
    """RK4 with step doubling until successive results differ by < tol in
    trace norm. Raises if 2**20 steps are not enough."""
    if duration == 0:
        return rho0
    n = max(16, int(math.ceil(duration * peak_be_norm(model, t0, duration))))
    prev = rk4_evolve(model, rho0, t0, duration, n)
    while True:
        n *= 2
        if n > MAX_REFERENCE_STEPS:
            raise RuntimeError(
                f"reference integration did not converge to {tol} within "
                f"{MAX_REFERENCE_STEPS} steps"
            )
        cur = rk4_evolve(model, rho0, t0, duration, n)
        if trace_norm(cur.matrix - prev.matrix) < tol:
            return cur
        prev = cur
