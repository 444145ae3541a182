"""Versioned model checkpoints: named float64 tensors + BN and optimizer state.

Stored as an .npz with a JSON manifest; load/save round-trips bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from ttalab.nn.model import BNState, LayerKind, Param, ParamSet
from ttalab.nn.optim import AdamState

FORMAT_VERSION = 1


def save_checkpoint(
    path: str,
    params: ParamSet,
    bn_state: BNState,
    opt_state: AdamState | None = None,
    extra: dict | None = None,
) -> None:
    arrays: dict[str, np.ndarray] = {}
    manifest = {
        "version": FORMAT_VERSION,
        "params": [{"name": p.name, "kind": p.kind.value} for p in params],
        "bn_layers": sorted(bn_state.ema_mean),
        "bn_momentum": bn_state.momentum,
        "bn_eps": bn_state.eps,
        "has_opt": opt_state is not None,
        "opt_t": opt_state.t if opt_state is not None else 0,
        "extra": extra or {},
    }
    for i, p in enumerate(params):
        arrays[f"param_{i}"] = p.value
    for layer in manifest["bn_layers"]:
        arrays[f"bn_mean_{layer}"] = bn_state.ema_mean[layer]
        arrays[f"bn_var_{layer}"] = bn_state.ema_var[layer]
    if opt_state is not None:
        for i, p in enumerate(params):
            arrays[f"adam_m_{i}"] = opt_state.m[p.name]
            arrays[f"adam_v_{i}"] = opt_state.v[p.name]
    arrays["manifest"] = np.frombuffer(json.dumps(manifest, sort_keys=True).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str):
    """Returns (params, bn_state, opt_state_or_None, extra)."""
    with np.load(path) as data:
        manifest = json.loads(bytes(data["manifest"]).decode())
        if manifest["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {manifest['version']}")
        params = ParamSet(
            [
                Param(entry["name"], LayerKind(entry["kind"]), data[f"param_{i}"].copy())
                for i, entry in enumerate(manifest["params"])
            ]
        )
        bn_state = BNState(
            ema_mean={layer: data[f"bn_mean_{layer}"].copy() for layer in manifest["bn_layers"]},
            ema_var={layer: data[f"bn_var_{layer}"].copy() for layer in manifest["bn_layers"]},
            momentum=manifest["bn_momentum"],
            eps=manifest["bn_eps"],
        )
        opt_state = None
        if manifest["has_opt"]:
            opt_state = AdamState(
                m={p.name: data[f"adam_m_{i}"].copy() for i, p in enumerate(params)},
                v={p.name: data[f"adam_v_{i}"].copy() for i, p in enumerate(params)},
                t=manifest["opt_t"],
            )
    return params, bn_state, opt_state, manifest["extra"]
