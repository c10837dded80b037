"""Monte-Carlo unraveling of the Lindblad flow by a linear stochastic ODE.

The state vector follows d psi = V_0 psi dt + sum_j V_j psi dW_j with
V_0 = -iH - (1/2) sum_j V_j^dag V_j. Trajectory norms are not preserved;
the density matrix is recovered as the plain average of outer products
E[psi psi^dag], which solves the Lindblad equation exactly in the mean.

Two steppers: Euler-Maruyama (weak order 1) and a second-order weak scheme
whose single-step mean map coincides exactly with the compact second-order
Kraus map, using two-point +-dt variables in place of Levy areas for the
mixed-noise terms.

Determinism: trajectory i draws its entire noise path from
numpy's default_rng seeded with (base_seed, i), so results are bit-identical
regardless of batch size or evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import hermitize
from .models import LindbladModel, effective_drift


@dataclass(frozen=True)
class TrajectoryBatch:
    num_traj: int
    states: np.ndarray  # (num_traj, dim) final state vectors
    base_seed: int


def em_step(model: LindbladModel, t: float, psi: np.ndarray, dt: float,
            noise: np.ndarray) -> np.ndarray:
    """One Euler-Maruyama step; noise holds num_jumps standard-normal draws
    (the Wiener increments are sqrt(dt) * noise)."""
    if noise.shape != (model.num_jumps,):
        raise ValueError(f"noise must have shape ({model.num_jumps},)")
    out = psi + dt * (effective_drift(model, t) @ psi)
    root = math.sqrt(dt)
    for j in range(1, model.num_jumps + 1):
        out = out + (root * noise[j - 1]) * (model.jump(j, t) @ psi)
    return out


def _pair_count(num_jumps: int) -> int:
    return num_jumps * (num_jumps - 1) // 2


def weak2_step(model: LindbladModel, t: float, psi: np.ndarray, dt: float,
               gaussians: np.ndarray, twopoints: np.ndarray) -> np.ndarray:
    """One second-order weak step.

    gaussians holds the num_jumps Wiener increments Delta W_j themselves
    (variance dt); twopoints holds the J(J-1)/2 two-point variables
    Delta Z_{j1 j2} in {+dt, -dt} for ordered pairs j1 < j2 in lexicographic
    order, extended antisymmetrically to j1 > j2. The (Delta W^2 - dt)/2
    compensator keeps the mean map free of a spurious dt V_a^2 / 2 term, so
    an all-zero draw is the drift step minus (dt/2) sum_a V_a^2 psi.
    """
    jn = model.num_jumps
    if gaussians.shape != (jn,):
        raise ValueError(f"gaussians must have shape ({jn},)")
    if twopoints.shape != (_pair_count(jn),):
        raise ValueError(f"twopoints must have shape ({_pair_count(jn)},)")
    v0 = effective_drift(model, t)
    vs = [model.jump(j, t) for j in range(1, jn + 1)]
    out = psi + dt * (v0 @ psi) + (dt * dt / 2) * (v0 @ (v0 @ psi))
    for a in range(jn):
        va = vs[a]
        drift_coupling = va @ v0 + v0 @ va
        out = out + gaussians[a] * (va @ psi + (dt / 2) * (drift_coupling @ psi))
        out = out + ((gaussians[a] ** 2 - dt) / 2) * (va @ (va @ psi))
    pair = 0
    for a in range(jn):
        for b in range(a + 1, jn):
            dz = twopoints[pair]
            pair += 1
            prod = gaussians[a] * gaussians[b]
            # ordered pair (a, b): V_b V_a; (b, a): V_a V_b; Delta Z flips sign
            out = out + ((prod - dz) / 2) * (vs[b] @ (vs[a] @ psi))
            out = out + ((prod + dz) / 2) * (vs[a] @ (vs[b] @ psi))
    return out


def _draw_paths(scheme: str, num_traj: int, num_steps: int, num_jumps: int,
                dt: float, base_seed: int):
    """Per-trajectory noise, drawn independently of batch size or order."""
    pairs = _pair_count(num_jumps)
    gaussians = np.empty((num_traj, num_steps, num_jumps))
    twopoints = np.empty((num_traj, num_steps, pairs)) if scheme == "weak2" else None
    for i in range(num_traj):
        rng = np.random.default_rng((base_seed, i))
        draws = rng.standard_normal((num_steps, num_jumps))
        if scheme == "em":
            gaussians[i] = draws
        else:
            gaussians[i] = draws * math.sqrt(dt)
            twopoints[i] = dt * (2.0 * rng.integers(0, 2, size=(num_steps, pairs)) - 1.0)
    return gaussians, twopoints


def evolve_batch(model: LindbladModel, scheme: str, psi0: np.ndarray, duration: float,
                 num_steps: int, num_traj: int, base_seed: int) -> TrajectoryBatch:
    """Propagate num_traj trajectories from the common initial vector psi0
    over [0, duration] with the chosen scheme ("em" or "weak2")."""
    if scheme not in ("em", "weak2"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if psi0.shape != (model.dim,):
        raise ValueError(f"psi0 must have shape ({model.dim},)")
    if num_steps < 1 or num_traj < 1:
        raise ValueError("num_steps and num_traj must be at least 1")
    if scheme == "weak2" and model.time_dependent:
        raise ValueError("the weak2 scheme supports time-independent models only")
    dt = duration / num_steps
    jn = model.num_jumps
    gaussians, twopoints = _draw_paths(scheme, num_traj, num_steps, jn, dt, base_seed)
    states = np.broadcast_to(psi0, (num_traj, model.dim)).astype(np.complex128)

    static = not model.time_dependent
    if static:
        v0 = effective_drift(model, 0.0)
        vs = [model.jump(j, 0.0) for j in range(1, jn + 1)]
        if scheme == "weak2":
            v0sq = v0 @ v0
            va_sq = [v @ v for v in vs]
            coupled = [vs[a] @ v0 + v0 @ vs[a] for a in range(jn)]
            mixed = {(a, b): vs[b] @ vs[a] for a in range(jn) for b in range(jn) if a != b}

    root_dt = math.sqrt(dt)
    for n in range(num_steps):
        if not static:
            tn = n * dt
            v0 = effective_drift(model, tn)
            vs = [model.jump(j, tn) for j in range(1, jn + 1)]
        if scheme == "em":
            out = states + dt * (states @ v0.T)
            for a in range(jn):
                out = out + (root_dt * gaussians[:, n, a])[:, None] * (states @ vs[a].T)
        else:
            out = states + dt * (states @ v0.T) + (dt * dt / 2) * (states @ v0sq.T)
            for a in range(jn):
                ga = gaussians[:, n, a][:, None]
                out = out + ga * (states @ vs[a].T + (dt / 2) * (states @ coupled[a].T))
                out = out + ((ga * ga - dt) / 2) * (states @ va_sq[a].T)
            pair = 0
            for a in range(jn):
                for b in range(a + 1, jn):
                    prod = gaussians[:, n, a] * gaussians[:, n, b]
                    dz = twopoints[:, n, pair]
                    pair += 1
                    out = out + ((prod - dz) / 2)[:, None] * (states @ mixed[(a, b)].T)
                    out = out + ((prod + dz) / 2)[:, None] * (states @ mixed[(b, a)].T)
        states = out
    return TrajectoryBatch(num_traj=num_traj, states=states, base_seed=base_seed)


def mc_density(batch: TrajectoryBatch):
    """Monte-Carlo density estimate: (mean outer product, standard error).

    The standard error is the Frobenius norm of the elementwise sample
    standard deviation of the outer products, divided by sqrt(num_traj).
    """
    states = batch.states
    m = batch.num_traj
    outers = states[:, :, None] * states[:, None, :].conj()
    mean = hermitize(outers.mean(axis=0))
    if m > 1:
        centered = outers - mean
        var = (centered.real**2 + centered.imag**2).sum(axis=0) / (m - 1)
        stderr = float(math.sqrt(var.sum()) / math.sqrt(m))
    else:
        stderr = float("inf")
    return mean, stderr
