"""Versioned checkpoints for both trainers.

One .npz file holds the magic header, the parameter arrays, the hyper scales,
the step counter, and the JSON-encoded generator state, so a resumed run
continues the exact noise stream. Particle states add rho and s_f.
"""

from __future__ import annotations

import json
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, InputDomainError
from .meanfield import ParticleState
from .network import ModelParams
from .tasks import Hyperparams

__all__ = ["save_checkpoint", "load_checkpoint", "MAGIC", "VERSION"]

MAGIC = "PLCK"
VERSION = 1

State = Union[ModelParams, ParticleState]


def _rng_state_json(rng: np.random.Generator) -> str:
    return json.dumps(
        rng.bit_generator.state,
        default=lambda o: o.tolist() if isinstance(o, np.ndarray) else int(o),
    )


def _rng_from_state(payload: str) -> np.random.Generator:
    state = json.loads(payload)
    name = state.get("bit_generator")
    try:
        bitgen = getattr(np.random, name)()
    except (TypeError, AttributeError) as exc:
        raise ConfigError(f"unsupported generator {name!r} in checkpoint") from exc
    bitgen.state = state
    return np.random.Generator(bitgen)


def _hyper_arrays(h: Hyperparams):
    return (
        np.array([h.N], dtype=np.int64),
        np.array([h.gamma, h.sigma_w, h.sigma_a, h.kappa, h.sigma_b]),
    )


def _hyper_from_arrays(n_arr, scales) -> Hyperparams:
    gamma, sigma_w, sigma_a, kappa, sigma_b = (float(v) for v in scales)
    return Hyperparams(
        N=int(n_arr[0]),
        gamma=gamma,
        sigma_w=sigma_w,
        sigma_a=sigma_a,
        kappa=kappa,
        sigma_b=sigma_b,
    )


def save_checkpoint(
    path, state: State, step: int, rng: Optional[np.random.Generator] = None
) -> None:
    """Write one atomic .npz snapshot of a trainer state."""
    if step < 0:
        raise InputDomainError(f"step must be >= 0, got {step}")
    if not isinstance(state, (ModelParams, ParticleState)):
        raise ConfigError(f"cannot checkpoint {type(state).__name__}")
    n_arr, scales = _hyper_arrays(state.hyper)
    payload = {
        "magic": np.array(MAGIC),
        "version": np.array([VERSION], dtype=np.int64),
        "step": np.array([step], dtype=np.int64),
        "hyper_n": n_arr,
        "hyper_scales": scales,
        "rng_state": np.array(_rng_state_json(rng) if rng is not None else ""),
    }
    if isinstance(state, ModelParams):
        payload["kind"] = np.array("reference")
        payload["W"] = state.W
        payload["a"] = state.a
        if state.b is not None:
            payload["b"] = state.b
    else:
        payload["kind"] = np.array("particle")
        payload["W"] = state.W_p
        payload["a"] = state.a_p
        payload["rho"] = state.rho
        payload["s_f"] = np.array([state.s_f])
    np.savez(path, **payload)


def load_checkpoint(path) -> Tuple[State, int, Optional[np.random.Generator]]:
    """Read a snapshot back; returns (state, step, rng-or-None)."""
    with np.load(path, allow_pickle=False) as z:
        if "magic" not in z or str(z["magic"]) != MAGIC:
            raise ConfigError(f"{path} is not a checkpoint file")
        version = int(z["version"][0])
        if version != VERSION:
            raise ConfigError(f"unsupported checkpoint version {version}")
        hyper = _hyper_from_arrays(z["hyper_n"], z["hyper_scales"])
        step = int(z["step"][0])
        kind = str(z["kind"])
        rng_payload = str(z["rng_state"])
        rng = _rng_from_state(rng_payload) if rng_payload else None
        if kind == "reference":
            state: State = ModelParams(
                W=z["W"].copy(),
                a=z["a"].copy(),
                b=z["b"].copy() if "b" in z else None,
                hyper=hyper,
            )
        elif kind == "particle":
            state = ParticleState(
                W_p=z["W"].copy(),
                a_p=z["a"].copy(),
                rho=z["rho"].copy(),
                s_f=float(z["s_f"][0]),
                hyper=hyper,
            )
        else:
            raise ConfigError(f"unknown checkpoint kind {kind!r}")
    return state, step, rng
