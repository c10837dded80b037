"""Lindblad models: Hamiltonian + jump operators with derivative oracles.

A model packages d, J, H(t), V_j(t) and time derivatives up to second order.
Jump indices are 1-based (j = 1..J) to match the block-index layout used by
the Kraus and dilation layers. Builtin benchmark models:

    tfim_damping    transverse-field Ising ring with per-site damping
    tfim_driven     the same ring driven by a linear pulse, J = 2
    periodic_qubit  single qubit with periodically driven H and jumps
    damped_qubit    sigma_z Hamiltonian with amplitude damping

Builtin callables broadcast over array-valued t (shape t.shape + (d, d)),
which the reference integrator exploits. Returned arrays may be read-only
views; do not mutate them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import operator_norm

SI = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
# basis |0> = e_0: sigma_minus maps e_1 -> e_0, sigma_plus maps e_0 -> e_1
SMINUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SPLUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class LindbladModel:
    """d-dimensional Lindblad generator data with derivative oracles.

    jump(j, t) takes 1-based j. derivative_order_available counts how many
    time derivatives the jump/Hamiltonian oracles actually provide (0, 1, or
    2); time-independent models report 2 since all derivatives are zero.
    """

    dim: int
    num_jumps: int
    hamiltonian: Callable
    ham_dot: Callable
    ham_ddot: Callable
    jump: Callable
    jump_dot: Callable
    jump_ddot: Callable
    time_dependent: bool
    derivative_order_available: int

    def jumps(self, t: float) -> list:
        return [self.jump(j, t) for j in range(1, self.num_jumps + 1)]


def _const_fn(mat: np.ndarray) -> Callable:
    def f(t):
        if np.ndim(t) == 0:
            return mat
        return np.broadcast_to(mat, np.shape(t) + mat.shape)

    return f


def _zero_fn(dim: int) -> Callable:
    return _const_fn(np.zeros((dim, dim), dtype=np.complex128))


def _const_jump_fn(mats: list) -> Callable:
    def f(j, t):
        m = mats[j - 1]
        if np.ndim(t) == 0:
            return m
        return np.broadcast_to(m, np.shape(t) + m.shape)

    return f


def static_model(hamiltonian: np.ndarray, jumps: list) -> LindbladModel:
    """Time-independent model from constant operator matrices."""
    h = np.asarray(hamiltonian, dtype=np.complex128)
    vs = [np.asarray(v, dtype=np.complex128) for v in jumps]
    d = h.shape[0]
    if h.shape != (d, d) or any(v.shape != (d, d) for v in vs):
        raise ValueError("all operators must be d x d")
    return LindbladModel(
        dim=d,
        num_jumps=len(vs),
        hamiltonian=_const_fn(h),
        ham_dot=_zero_fn(d),
        ham_ddot=_zero_fn(d),
        jump=_const_jump_fn(vs),
        jump_dot=lambda j, t: np.zeros((d, d), dtype=np.complex128),
        jump_ddot=lambda j, t: np.zeros((d, d), dtype=np.complex128),
        time_dependent=False,
        derivative_order_available=2,
    )


def finite_difference_model(
    dim: int, num_jumps: int, hamiltonian: Callable, jump: Callable
) -> LindbladModel:
    """Wrap scalar-t callables, supplying derivatives by central differences.

    Step h = 1e-5 * max(1, |t|). Second derivatives lose roughly half the
    mantissa to cancellation; analytic oracles are preferred when available.
    """

    def _h(t):
        return 1e-5 * max(1.0, abs(t))

    def ham_dot(t):
        h = _h(t)
        return (hamiltonian(t + h) - hamiltonian(t - h)) / (2 * h)

    def ham_ddot(t):
        h = _h(t)
        return (hamiltonian(t + h) - 2 * hamiltonian(t) + hamiltonian(t - h)) / h**2

    def jump_dot(j, t):
        h = _h(t)
        return (jump(j, t + h) - jump(j, t - h)) / (2 * h)

    def jump_ddot(j, t):
        h = _h(t)
        return (jump(j, t + h) - 2 * jump(j, t) + jump(j, t - h)) / h**2

    return LindbladModel(
        dim=dim,
        num_jumps=num_jumps,
        hamiltonian=hamiltonian,
        ham_dot=ham_dot,
        ham_ddot=ham_ddot,
        jump=jump,
        jump_dot=jump_dot,
        jump_ddot=jump_ddot,
        time_dependent=True,
        derivative_order_available=2,
    )


def effective_drift(model: LindbladModel, t: float) -> np.ndarray:
    """V_0 = -i H - (1/2) sum_j V_j^dag V_j, the non-unitary drift."""
    acc = -1j * np.asarray(model.hamiltonian(t), dtype=np.complex128)
    for j in range(1, model.num_jumps + 1):
        v = model.jump(j, t)
        acc = acc - 0.5 * (v.conj().T @ v)
    return acc


def be_norm(model: LindbladModel, t: float) -> float:
    """1 + ||H(t)|| + sum_j ||V_j(t)||^2, the stability scale of the generator."""
    total = 1.0 + operator_norm(model.hamiltonian(t))
    for j in range(1, model.num_jumps + 1):
        total += operator_norm(model.jump(j, t)) ** 2
    return total


def peak_be_norm(model: LindbladModel, t0: float, duration: float) -> float:
    """Largest stability scale over [t0, t0 + duration], sampled on a 33-point
    grid for time-dependent models (exact for time-independent ones)."""
    if not model.time_dependent or duration == 0:
        return be_norm(model, t0)
    ts = np.linspace(t0, t0 + duration, 33)
    return max(be_norm(model, float(t)) for t in ts)


def site_operator(op: np.ndarray, site: int, m: int) -> np.ndarray:
    """op acting on the given site (1-based, site 1 leftmost) of m qubits."""
    if not 1 <= site <= m:
        raise ValueError(f"site {site} out of range 1..{m}")
    out = np.ones((1, 1), dtype=np.complex128)
    for s in range(1, m + 1):
        out = np.kron(out, op if s == site else SI)
    return out


def _tfim_hamiltonian(m: int, g: float) -> np.ndarray:
    h = np.zeros((2**m, 2**m), dtype=np.complex128)
    for i in range(1, m + 1):
        nxt = i + 1 if i < m else 1  # periodic ring
        h -= site_operator(SZ, i, m) @ site_operator(SZ, nxt, m)
        h -= g * site_operator(SX, i, m)
    return h


def _site_lowering_jumps(m: int, gamma: float, count: int) -> list:
    root = np.sqrt(gamma)
    return [root * site_operator((SX - 1j * SY) / 2, j, m) for j in range(1, count + 1)]


def tfim_damping(m: int = 4, g: float = 1.0, gamma: float = 0.1) -> LindbladModel:
    """Transverse-field Ising ring with damping sqrt(gamma)(X_j - iY_j)/2 on every site."""
    if m < 2:
        raise ValueError("need at least 2 sites")
    return static_model(_tfim_hamiltonian(m, g), _site_lowering_jumps(m, gamma, m))


def tfim_driven(
    m: int = 4, g: float = 1.0, gamma: float = 0.1, seed: int = 7
) -> LindbladModel:
    """TFIM ring under a linear pulse: H(t) = H + t H', V_j(t) = V_j + t V_j'.

    H' is a normalized Hermitian Gaussian matrix and each V_j' a normalized
    Gaussian matrix, all drawn from a seeded generator (independent real and
    imaginary standard-normal parts), so the model is deterministic in seed.
    Two jump channels on sites 1 and 2.
    """
    if m < 2:
        raise ValueError("need at least 2 sites")
    d = 2**m
    rng = np.random.default_rng(seed)

    def draw() -> np.ndarray:
        return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

    g0 = draw()
    h_slope = g0 + g0.conj().T
    h_slope = h_slope / operator_norm(h_slope)
    v_slopes = []
    for _ in range(2):
        gj = draw()
        v_slopes.append(gj / operator_norm(gj))

    h_base = _tfim_hamiltonian(m, g)
    v_bases = _site_lowering_jumps(m, gamma, 2)

    def hamiltonian(t):
        t = np.asarray(t, dtype=float)
        return h_base + t[..., None, None] * h_slope

    def jump(j, t):
        t = np.asarray(t, dtype=float)
        return v_bases[j - 1] + t[..., None, None] * v_slopes[j - 1]

    return LindbladModel(
        dim=d,
        num_jumps=2,
        hamiltonian=hamiltonian,
        ham_dot=_const_fn(h_slope),
        ham_ddot=_zero_fn(d),
        jump=jump,
        jump_dot=lambda j, t: v_slopes[j - 1],
        jump_ddot=lambda j, t: np.zeros((d, d), dtype=np.complex128),
        time_dependent=True,
        derivative_order_available=2,
    )


def periodic_qubit() -> LindbladModel:
    """Qubit with H(t) = -(sqrt2/2)(1 - cos t) sigma_z and periodically
    modulated raising/lowering jumps V_1 = (2 + sin(t)/2) sigma_plus,
    V_2 = (3 - sin(t)/2) sigma_minus. All derivatives analytic.
    """
    c = np.sqrt(2.0) / 2.0

    def scaled(factor_of_t, mat):
        def f(t):
            t = np.asarray(t, dtype=float)
            return factor_of_t(t)[..., None, None] * mat

        return f

    hamiltonian = scaled(lambda t: -c * (1 - np.cos(t)), SZ)
    ham_dot = scaled(lambda t: -c * np.sin(t), SZ)
    ham_ddot = scaled(lambda t: -c * np.cos(t), SZ)

    jump_fns = {
        0: [scaled(lambda t: 2 + 0.5 * np.sin(t), SPLUS), scaled(lambda t: 3 - 0.5 * np.sin(t), SMINUS)],
        1: [scaled(lambda t: 0.5 * np.cos(t), SPLUS), scaled(lambda t: -0.5 * np.cos(t), SMINUS)],
        2: [scaled(lambda t: -0.5 * np.sin(t), SPLUS), scaled(lambda t: 0.5 * np.sin(t), SMINUS)],
    }

    return LindbladModel(
        dim=2,
        num_jumps=2,
        hamiltonian=hamiltonian,
        ham_dot=ham_dot,
        ham_ddot=ham_ddot,
        jump=lambda j, t: jump_fns[0][j - 1](t),
        jump_dot=lambda j, t: jump_fns[1][j - 1](t),
        jump_ddot=lambda j, t: jump_fns[2][j - 1](t),
        time_dependent=True,
        derivative_order_available=2,
    )


def damped_qubit(hz: float = 1.0, gamma: float = 1.0) -> LindbladModel:
    """H = hz * sigma_z with amplitude damping sqrt(gamma) * sigma_minus."""
    return static_model(hz * SZ, [np.sqrt(gamma) * SMINUS])
