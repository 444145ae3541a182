"""Classifier, gradient engine, BN statistics handling, and source training."""

from ttalab.nn.checkpoint import load_checkpoint, save_checkpoint
from ttalab.nn.convops import BACKEND, conv2d_backward, conv2d_forward
from ttalab.nn.model import (
    BNState,
    ForwardCache,
    GradSet,
    LayerKind,
    Mode,
    Param,
    ParamSet,
    backward,
    forward,
    init_params,
    softmax,
)
from ttalab.nn.optim import AdamState, adam_step, init_adam
from ttalab.nn.train import TrainResult, train_source

__all__ = [
    "BACKEND",
    "AdamState",
    "BNState",
    "ForwardCache",
    "GradSet",
    "LayerKind",
    "Mode",
    "Param",
    "ParamSet",
    "TrainResult",
    "adam_step",
    "backward",
    "conv2d_backward",
    "conv2d_forward",
    "forward",
    "init_adam",
    "init_params",
    "load_checkpoint",
    "save_checkpoint",
    "softmax",
    "train_source",
]
