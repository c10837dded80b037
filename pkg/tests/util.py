"""Seeded random matrices and models shared across test modules."""

import numpy as np

from lindblad_dilation import static_model


def random_matrix(rng, d, scale=1.0):
    return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))


def random_hermitian(rng, d, scale=1.0):
    g = random_matrix(rng, d, scale)
    return (g + g.conj().T) / 2


def random_model(seed, dim=2, num_jumps=1, scale=0.6):
    """Time-independent model with a random Hermitian H and random jumps."""
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, dim, scale)
    jumps = [random_matrix(rng, dim, scale) for _ in range(num_jumps)]
    return static_model(h, jumps)
