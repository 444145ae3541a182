"""Source-domain training: plain cross-entropy with Adam on clean labeled samples."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ttalab.nn.model import BNState, Mode, ParamSet, backward, forward, init_params, softmax
from ttalab.nn.optim import adam_step, init_adam

logger = logging.getLogger(__name__)

SOURCE_LR = 1e-3


@dataclass
class TrainResult:
    params: ParamSet
    bn_state: BNState
    epoch_losses: list[float]


def _as_arrays(stream):
    images, labels = [], []
    for sample in stream:
        images.append(np.asarray(sample.image.pixels, dtype=np.float64))
        labels.append(int(sample.label))
    if not images:
        raise ValueError("training stream is empty")
    return np.stack(images), np.asarray(labels, dtype=np.int64)


def train_source(stream, epochs: int, seed: int, batch_size: int = 32, lr: float = SOURCE_LR) -> TrainResult:
    """Train the detector from scratch; deterministic given (stream, epochs, seed)."""
    images, labels = _as_arrays(stream)
    n = len(labels)
    params, bn_state = init_params(seed)
    opt = init_adam(params)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7EA1]))

    epoch_losses: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            if len(idx) < 2:
                continue  # batch statistics need >= 2 samples
            logits, cache = forward(params, bn_state, images[idx], Mode.TRAIN)
            probs = softmax(logits)
            y = labels[idx]
            losses.append(float(-np.log(np.clip(probs[np.arange(len(y)), y], 1e-12, None)).mean()))
            dlogits = probs.copy()
            dlogits[np.arange(len(y)), y] -= 1.0
            dlogits /= len(y)
            grads = backward(params, cache, dlogits)
            adam_step(params, grads, opt, lr)
        epoch_losses.append(float(np.mean(losses)))
        logger.info("epoch %d: mean loss %.6f", epoch, epoch_losses[-1])
    return TrainResult(params=params, bn_state=bn_state, epoch_losses=epoch_losses)
