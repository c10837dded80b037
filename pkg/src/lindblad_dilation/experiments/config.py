"""Experiment configuration: frozen dataclasses parsed from strict JSON.

Unknown keys anywhere in the file are rejected rather than ignored, so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

OBSERVABLES = ("overlap_with_initial", "pauli_z_expectation")
INITIAL_STATE_KINDS = ("ground_state", "random", "basis")

DEFAULT_MAX_STEP_FACTOR = 4.0


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str
    seed: int | None = None
    index: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    orders: tuple
    dt_list: tuple
    T: float
    initial_state: InitialStateSpec
    observable: str
    base_seed: int
    output_dir: str
    # dt*be budget passed to the stepper; the builtin study grids run at
    # dt*be of a few, which is accurate in practice though above the
    # conservative default guard of evolve()
    max_step_factor: float = DEFAULT_MAX_STEP_FACTOR
    workers: int = 1


_TOP_KEYS = {
    "model", "orders", "dt_list", "T", "initial_state", "observable",
    "base_seed", "output_dir", "max_step_factor", "workers",
}
_OPTIONAL_KEYS = {"max_step_factor", "workers"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown {where} key(s): {sorted(unknown)}")


def _parse_model(obj) -> ModelSpec:
    if not isinstance(obj, dict):
        raise ValueError("model must be an object with 'name' and optional 'params'")
    _reject_unknown(obj, {"name", "params"}, "model")
    if "name" not in obj or not isinstance(obj["name"], str):
        raise ValueError("model.name must be a string")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("model.params must be an object")
    return ModelSpec(name=obj["name"], params=dict(params))


def _parse_initial_state(obj) -> InitialStateSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("initial_state must be an object with a 'kind'")
    kind = obj["kind"]
    if kind not in INITIAL_STATE_KINDS:
        raise ValueError(f"initial_state.kind must be one of {INITIAL_STATE_KINDS}")
    if kind == "ground_state":
        _reject_unknown(obj, {"kind"}, "initial_state")
        return InitialStateSpec(kind=kind)
    if kind == "random":
        _reject_unknown(obj, {"kind", "seed"}, "initial_state")
        if not isinstance(obj.get("seed"), int):
            raise ValueError("initial_state.seed must be an integer for kind 'random'")
        return InitialStateSpec(kind=kind, seed=obj["seed"])
    _reject_unknown(obj, {"kind", "index"}, "initial_state")
    if not isinstance(obj.get("index"), int) or obj["index"] < 0:
        raise ValueError("initial_state.index must be a nonnegative integer for kind 'basis'")
    return InitialStateSpec(kind=kind, index=obj["index"])


def config_from_dict(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ValueError("config must be a JSON object")
    _reject_unknown(obj, _TOP_KEYS, "config")
    missing = (_TOP_KEYS - _OPTIONAL_KEYS) - set(obj)
    if missing:
        raise ValueError(f"missing config key(s): {sorted(missing)}")

    model = _parse_model(obj["model"])

    orders = obj["orders"]
    if (not isinstance(orders, list) or not orders
            or any(not isinstance(k, int) or k not in (1, 2, 3) for k in orders)):
        raise ValueError("orders must be a nonempty list drawn from {1, 2, 3}")
    if len(set(orders)) != len(orders):
        raise ValueError("orders must not repeat")

    t_final = obj["T"]
    if not isinstance(t_final, (int, float)) or t_final <= 0:
        raise ValueError("T must be a positive number")
    t_final = float(t_final)

    dt_list = obj["dt_list"]
    if not isinstance(dt_list, list) or not dt_list:
        raise ValueError("dt_list must be a nonempty list")
    dts = []
    for dt in dt_list:
        if not isinstance(dt, (int, float)) or dt <= 0:
            raise ValueError("dt_list entries must be positive numbers")
        dt = float(dt)
        steps = round(t_final / dt)
        if steps < 1 or abs(steps * dt - t_final) > 1e-12 * max(1.0, abs(t_final)):
            raise ValueError(f"dt = {dt!r} does not divide T = {t_final!r}")
        dts.append(dt)
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("dt_list must be strictly decreasing")

    observable = obj["observable"]
    if observable not in OBSERVABLES:
        raise ValueError(f"observable must be one of {OBSERVABLES}")

    base_seed = obj["base_seed"]
    if not isinstance(base_seed, int) or base_seed < 0:
        raise ValueError("base_seed must be a nonnegative integer")

    output_dir = obj["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ValueError("output_dir must be a nonempty string")

    max_step_factor = obj.get("max_step_factor", DEFAULT_MAX_STEP_FACTOR)
    if not isinstance(max_step_factor, (int, float)) or max_step_factor <= 0:
        raise ValueError("max_step_factor must be a positive number")

    workers = obj.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ValueError("workers must be a positive integer")

    return ExperimentConfig(
        model=model,
        orders=tuple(orders),
        dt_list=tuple(dts),
        T=t_final,
        initial_state=_parse_initial_state(obj["initial_state"]),
        observable=observable,
        base_seed=base_seed,
        output_dir=output_dir,
        max_step_factor=float(max_step_factor),
        workers=workers,
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
