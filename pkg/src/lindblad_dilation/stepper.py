"""Density-matrix propagation through the dilated unitary.

One step: exponentiate the dilated Hamiltonian for sqrt(dt), read the first
block column of the unitary as a family of system-space operators W_b, and
apply rho -> sum_b W_b rho W_b^dag. Because the W_b are blocks of one
unitary's column, sum_b W_b^dag W_b = I exactly, so every step is a genuine
CPTP map: trace and positivity are preserved to machine precision at any
step size, and only the *accuracy* of the map degrades when dt is too large.

The zero padding blocks of the dilated matrix stay zero under the matrix
exponential (the padded sector decouples and exponentiates to the identity,
so its first-column blocks vanish); the exponential is therefore taken on
the occupied leading square of the matrix only.
"""

from __future__ import annotations

import math

import numpy as np

from .dilation import DilatedHamiltonian, dilate_by_order
from .linalg import DensityMatrix, expm_hermitian, hermitize
from .models import LindbladModel, peak_be_norm

DEFAULT_MAX_STEP_FACTOR = 0.5


def kraus_operators(dh: DilatedHamiltonian) -> np.ndarray:
    """Stacked (num_blocks, d, d) operators W_b from the first block column
    of exp(-i sqrt(dt) H~), padding rows dropped (they are exactly zero)."""
    d = dh.sys_dim
    occupied = dh.num_blocks * d
    u = expm_hermitian(dh.assembled[:occupied, :occupied], math.sqrt(dh.dt))
    return u[:, :d].reshape(dh.num_blocks, d, d)


def _apply(ws: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return hermitize(np.einsum("jab,bc,jdc->ad", ws, rho, ws.conj()))


def step(dh: DilatedHamiltonian, rho: DensityMatrix) -> DensityMatrix:
    """Advance rho by one dilated-unitary step of size dh.dt."""
    if rho.dim != dh.sys_dim:
        raise ValueError(f"state dimension {rho.dim} != system dimension {dh.sys_dim}")
    return DensityMatrix(_apply(kraus_operators(dh), rho.matrix))


def evolve(model: LindbladModel, order: int, rho0: DensityMatrix, duration: float,
           num_steps: int, max_step_factor: float = DEFAULT_MAX_STEP_FACTOR) -> list:
    """Propagate rho0 over [0, duration] in num_steps dilated-unitary steps
    of the given order, returning all num_steps + 1 states.

    Raises ValueError when dt exceeds max_step_factor / be, where be is the
    peak stability scale of the generator: beyond that the step map, while
    still exactly CPTP, no longer tracks the Lindblad flow at the claimed
    order. Time-dependent models rebuild the dilation at the left endpoint
    of each step; time-independent ones reuse a single dilation.
    """
    if rho0.dim != model.dim:
        raise ValueError(f"state dimension {rho0.dim} != model dimension {model.dim}")
    if num_steps < 1:
        raise ValueError("num_steps must be at least 1")
    if duration <= 0:
        raise ValueError("duration must be positive")
    dt = duration / num_steps
    be = peak_be_norm(model, 0.0, duration)
    if dt * be > max_step_factor:
        needed = int(math.ceil(duration * be / max_step_factor))
        raise ValueError(
            f"dt = {dt:.6g} exceeds the stability budget {max_step_factor:.3g}/be "
            f"with be = {be:.6g}; use num_steps >= {needed} or raise max_step_factor"
        )
    states = [rho0]
    m = rho0.matrix
    if not model.time_dependent:
        ws = kraus_operators(dilate_by_order(model, order, 0.0, dt))
        for _ in range(num_steps):
            m = _apply(ws, m)
            states.append(DensityMatrix(m))
    else:
        for n in range(num_steps):
            ws = kraus_operators(dilate_by_order(model, order, n * dt, dt))
            m = _apply(ws, m)
            states.append(DensityMatrix(m))
    return states
