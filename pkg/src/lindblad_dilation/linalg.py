"""Dense complex matrix kernel: Kronecker products, Hermitian matrix
exponential, ancilla partial trace, and the two norms used everywhere else.

Matrices are plain complex128 numpy arrays. The ancilla register is always
the leading (left) tensor factor, so a state on the enlarged space reshapes
to (ancilla_dim, sys_dim, ancilla_dim, sys_dim) without any permutation.
"""

from __future__ import annotations

import numpy as np

# Default tolerances. Callers may override per call; these values are the
# contract used by the test suite.
HERMITICITY_RTOL = 1e-12
DENSITY_TRACE_ATOL = 1e-10
DENSITY_EIG_FLOOR = -1e-10
EXPM_HERMITICITY_RTOL = 1e-10


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def partial_trace_ancilla(m, ancilla_dim: int, sys_dim: int) -> np.ndarray:
    """Trace out the leading ancilla factor of a square matrix.

    Returns sum_j (<j| (x) I) m (|j> (x) I), a sys_dim x sys_dim matrix.
    The total trace is preserved exactly (it is a plain index contraction).
    """
    m = _as_matrix(m)
    n = ancilla_dim * sys_dim
    if m.shape != (n, n):
        raise ValueError(
            f"matrix shape {m.shape} incompatible with ancilla_dim={ancilla_dim}, "
            f"sys_dim={sys_dim}"
        )
    return np.einsum(
        "ajak->jk", m.reshape(ancilla_dim, sys_dim, ancilla_dim, sys_dim)
    )


def expm_hermitian(h, scale: float, rtol: float = EXPM_HERMITICITY_RTOL) -> np.ndarray:
    """exp(-1j * scale * h) for Hermitian h, via eigendecomposition.

    Raises if h is not Hermitian within rtol * ||h||: a non-Hermitian input
    here means an upstream dilation is broken, and silently symmetrizing
    would hide that.
    """
    h = _as_matrix(h)
    scale_norm = np.linalg.norm(h)
    defect = np.linalg.norm(h - h.conj().T)
    if defect > rtol * max(scale_norm, 1.0):
        raise ValueError(
            f"expm_hermitian: input not Hermitian (defect {defect:.3e}, "
            f"norm {scale_norm:.3e})"
        )
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * scale * w)
    return (v * phases) @ v.conj().T


def trace_norm(m) -> float:
    """Schatten 1-norm: sum of singular values."""
    return float(np.linalg.svd(_as_matrix(m), compute_uv=False).sum())


def operator_norm(m) -> float:
    """Largest singular value."""
    m = _as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


class DensityMatrix:
    """A validated d x d density matrix.

    Validation enforces Hermiticity within 1e-12 (relative), unit trace
    within 1e-10, and minimum eigenvalue >= -1e-10. Construction is the
    single checkpoint: code that produces states builds one of these, so a
    CPTP bug surfaces at the step that caused it.
    """

    __slots__ = ("dim", "matrix")

    def __init__(self, matrix, validate: bool = True):
        m = _as_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if validate:
            scale = max(float(np.linalg.norm(m)), 1.0)
            defect = float(np.linalg.norm(m - m.conj().T))
            if defect > HERMITICITY_RTOL * scale:
                raise ValueError(f"density matrix not Hermitian: defect {defect:.3e}")
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > DENSITY_TRACE_ATOL:
                raise ValueError(f"density matrix trace {tr} not 1")
            min_eig = float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())
            if min_eig < DENSITY_EIG_FLOOR:
                raise ValueError(f"density matrix has eigenvalue {min_eig:.3e} < 0")
        self.dim = m.shape[0]
        self.matrix = m

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        v = np.asarray(psi, dtype=np.complex128).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis(cls, dim: int, index: int) -> "DensityMatrix":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dim {dim}")
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[index, index] = 1.0
        return cls(m)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    @classmethod
    def random(cls, dim: int, seed: int) -> "DensityMatrix":
        """Full-rank random state: G G^dag / tr, with G complex Gaussian."""
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = g @ g.conj().T
        return cls(m / np.trace(m).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


def hermitize(m) -> np.ndarray:
    """(M + M^dag)/2; used after steps to scrub floating-point asymmetry."""
    m = _as_matrix(m)
    return (m + m.conj().T) / 2
