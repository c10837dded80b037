"""JSON encodings for complex matrices and dilated Hamiltonians.

Complex entries are stored as [re, im] pairs in row-major order. Values pass
through Python floats, whose JSON representation round-trips binary64
exactly, so dump -> load is bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .dilation import DilatedHamiltonian


def matrix_to_json(m: np.ndarray) -> dict:
    """{"rows": R, "cols": C, "data": [[re, im], ...]} with row-major data."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("matrix_to_json expects a 2-d array")
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {len(data)}")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)


def _block_to_pairs(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]


def dilation_to_json(dh: DilatedHamiltonian) -> dict:
    """{"sys_dim", "ancilla_qubits", "blocks"}: H_0 .. H_S as flat row-major
    [re, im] pair lists (padding blocks are identically zero and omitted)."""
    return {
        "sys_dim": dh.sys_dim,
        "ancilla_qubits": dh.ancilla_qubits,
        "blocks": [_block_to_pairs(b) for b in dh.blocks],
    }


def dilation_from_json(obj: dict) -> dict:
    """Inverse of dilation_to_json; "blocks" becomes a list of (d, d) arrays."""
    d = int(obj["sys_dim"])
    blocks = []
    for pairs in obj["blocks"]:
        if len(pairs) != d * d:
            raise ValueError(f"block has {len(pairs)} entries, expected {d * d}")
        flat = np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)
        blocks.append(flat.reshape(d, d))
    return {
        "sys_dim": d,
        "ancilla_qubits": int(obj["ancilla_qubits"]),
        "blocks": blocks,
    }


def dump_dilation(dh: DilatedHamiltonian, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dilation_to_json(dh), fh)
        fh.write("\n")


def load_dilation(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return dilation_from_json(json.load(fh))
