"""Adam with the usual bias correction; state is plain arrays so it serializes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ttalab.nn.model import GradSet, ParamSet

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    def copy(self) -> "AdamState":
        return AdamState(
            m={k: a.copy() for k, a in self.m.items()},
            v={k: a.copy() for k, a in self.v.items()},
            t=self.t,
        )


def init_adam(params: ParamSet) -> AdamState:
    return AdamState(
        m={p.name: np.zeros_like(p.value) for p in params},
        v={p.name: np.zeros_like(p.value) for p in params},
        t=0,
    )


def adam_step(params: ParamSet, grads: GradSet, state: AdamState, lr: float) -> None:
    """One in-place Adam update over every parameter."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient for parameter {name!r}")
    state.t += 1
    t = state.t
    for p in params:
        g = grads[p.name]
        m = state.m[p.name]
        v = state.v[p.name]
        m *= ADAM_BETA1
        m += (1 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1 - ADAM_BETA2) * g * g
        mhat = m / (1 - ADAM_BETA1**t)
        vhat = v / (1 - ADAM_BETA2**t)
        p.value -= lr * mhat / (np.sqrt(vhat) + ADAM_EPS)
