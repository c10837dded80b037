"""Truncated formal power series in sqrt(dt) with matrix coefficients.

The coefficient at integer index p multiplies dt**(p/2); indexing by the
doubled exponent keeps all bookkeeping in integers. Truncation order is
carried by each value and binary operations truncate to the shorter of the
two, so a product never pretends to more accuracy than its inputs had.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HalfPowerSeries:
    """sum_p coeffs[p] * dt**(p/2) for p = 0..max_half_power."""

    dim: int
    max_half_power: int
    coeffs: tuple  # tuple of (dim, dim) complex arrays, length max_half_power + 1

    def __post_init__(self):
        if len(self.coeffs) != self.max_half_power + 1:
            raise ValueError(
                f"need {self.max_half_power + 1} coefficients, got {len(self.coeffs)}"
            )
        for c in self.coeffs:
            if c.shape != (self.dim, self.dim):
                raise ValueError(f"coefficient shape {c.shape} != ({self.dim}, {self.dim})")


def _zeros(dim: int) -> np.ndarray:
    return np.zeros((dim, dim), dtype=np.complex128)


def series_from_coeffs(dim: int, max_half_power: int, entries: dict) -> HalfPowerSeries:
    """Build a series from a sparse {half_power: matrix} mapping."""
    coeffs = []
    for p in range(max_half_power + 1):
        c = entries.get(p)
        coeffs.append(_zeros(dim) if c is None else np.asarray(c, dtype=np.complex128))
    return HalfPowerSeries(dim, max_half_power, tuple(coeffs))


def zero_series(dim: int, max_half_power: int) -> HalfPowerSeries:
    return series_from_coeffs(dim, max_half_power, {})


def identity_series(dim: int, max_half_power: int) -> HalfPowerSeries:
    return series_from_coeffs(dim, max_half_power, {0: np.eye(dim)})


def series_add(a: HalfPowerSeries, b: HalfPowerSeries) -> HalfPowerSeries:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} != {b.dim}")
    m = min(a.max_half_power, b.max_half_power)
    return HalfPowerSeries(a.dim, m, tuple(a.coeffs[p] + b.coeffs[p] for p in range(m + 1)))


def series_scale(a: HalfPowerSeries, factor: complex) -> HalfPowerSeries:
    return HalfPowerSeries(a.dim, a.max_half_power, tuple(factor * c for c in a.coeffs))


def series_shift(a: HalfPowerSeries, half_powers: int) -> HalfPowerSeries:
    """Multiply by dt**(half_powers/2), keeping the same truncation order."""
    if half_powers < 0:
        raise ValueError("negative shift would create a Laurent tail")
    coeffs = [_zeros(a.dim)] * half_powers + list(a.coeffs)
    return HalfPowerSeries(a.dim, a.max_half_power, tuple(coeffs[: a.max_half_power + 1]))


def series_dagger(a: HalfPowerSeries) -> HalfPowerSeries:
    return HalfPowerSeries(a.dim, a.max_half_power, tuple(c.conj().T for c in a.coeffs))


def series_mul(a: HalfPowerSeries, b: HalfPowerSeries) -> HalfPowerSeries:
    """Cauchy product truncated at min(max_half_power)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} != {b.dim}")
    m = min(a.max_half_power, b.max_half_power)
    out = [_zeros(a.dim) for _ in range(m + 1)]
    for p, ca in enumerate(a.coeffs[: m + 1]):
        # skip structurally zero coefficients; the series here are sparse
        if not ca.any():
            continue
        for q in range(m + 1 - p):
            cb = b.coeffs[q]
            if cb.any():
                out[p + q] = out[p + q] + ca @ cb
    return HalfPowerSeries(a.dim, m, tuple(out))


def exp_of_nilpotent_order(h_series: HalfPowerSeries) -> HalfPowerSeries:
    """sum_n h^n / n!, truncated at h_series.max_half_power.

    Requires a vanishing constant coefficient: every factor of h then raises
    the minimum half-power by at least one, so the sum terminates after
    max_half_power terms.
    """
    c0 = h_series.coeffs[0]
    if np.linalg.norm(c0) > 1e-13 * max(1.0, max(np.linalg.norm(c) for c in h_series.coeffs)):
        raise ValueError("exp_of_nilpotent_order: constant coefficient is nonzero")
    result = identity_series(h_series.dim, h_series.max_half_power)
    term = identity_series(h_series.dim, h_series.max_half_power)
    for n in range(1, h_series.max_half_power + 1):
        term = series_mul(term, h_series)
        result = series_add(result, series_scale(term, 1.0 / math.factorial(n)))
    return result


def evaluate(s: HalfPowerSeries, dt: float) -> np.ndarray:
    """sum_p coeffs[p] * dt**(p/2)."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    root = math.sqrt(dt)
    acc = _zeros(s.dim)
    w = 1.0
    for c in s.coeffs:
        if c.any():
            acc = acc + w * c
        w *= root
    return acc
