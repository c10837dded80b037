"""CSV emission and the on-disk reference cache.

Floats are printed with 17 significant digits (%.17g), enough to round-trip
binary64, and rows are written in a deterministic sorted order so identical
configurations yield byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .config import ExperimentConfig

CONVERGENCE_HEADER = "order,dt,error_trace_norm,wall_seconds"
OBSERVABLE_HEADER = "order,step,t,value"


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_convergence_csv(path: str, rows: list) -> None:
    """rows: (order, dt, error_trace_norm, wall_seconds) tuples, pre-sorted."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CONVERGENCE_HEADER + "\n")
        for order, dt, err, wall in rows:
            fh.write(f"{order},{format_float(dt)},{format_float(err)},{format_float(wall)}\n")


def write_observable_csv(path: str, rows: list) -> None:
    """rows: (order, step, t, value) tuples, pre-sorted; order 0 marks the
    reference curve."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(OBSERVABLE_HEADER + "\n")
        for order, step, t, value in rows:
            fh.write(f"{order},{step},{format_float(t)},{format_float(value)}\n")


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def reference_cache_key(cfg: ExperimentConfig) -> str:
    """Content hash over exactly the inputs the reference solution depends
    on: model name + parameters, the horizon T, and the initial state."""
    payload = {
        "model": {"name": cfg.model.name, "params": cfg.model.params},
        "T": cfg.T,
        "initial_state": {
            "kind": cfg.initial_state.kind,
            "seed": cfg.initial_state.seed,
            "index": cfg.initial_state.index,
        },
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _cache_path(output_dir: str, key: str) -> str:
    return os.path.join(output_dir, "_refcache", f"{key}.npz")


def load_cached_reference(output_dir: str, key: str):
    path = _cache_path(output_dir, key)
    if not os.path.exists(path):
        return None
    with np.load(path) as data:
        return data["rho"]


def store_cached_reference(output_dir: str, key: str, rho: np.ndarray) -> None:
    cache_dir = os.path.join(output_dir, "_refcache")
    os.makedirs(cache_dir, exist_ok=True)
    np.savez(_cache_path(output_dir, key), rho=rho)
