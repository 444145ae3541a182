"""The detector network: conv-BN-ReLU x2 -> global average pool -> linear head.

Fixed architecture, float64 throughout:

    conv 3x3 (3->8, stride 1, pad 1) -> BN -> ReLU
    conv 3x3 (8->16, stride 2, pad 1) -> BN -> ReLU
    global average pool -> linear (16->2)

Convolutions carry no bias (the BN shift plays that role). BatchNorm uses
biased batch variance with eps 1e-5 inside the denominator; running statistics
are exponential moving averages with momentum 0.1, updated only in TRAIN mode.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ttalab.nn.convops import conv2d_backward, conv2d_forward

__all__ = [
    "LayerKind",
    "Param",
    "ParamSet",
    "GradSet",
    "BNState",
    "Mode",
    "ForwardCache",
    "init_params",
    "forward",
    "backward",
    "softmax",
]

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
_CH1, _CH2, _KSIZE, _NCLASS = 8, 16, 3, 2
_BN_LAYERS = ("bn1", "bn2")


class LayerKind(enum.Enum):
    BN_SCALE = "bn_scale"
    BN_SHIFT = "bn_shift"
    CONV_KERNEL = "conv_kernel"
    LINEAR_WEIGHT = "linear_weight"
    LINEAR_BIAS = "linear_bias"

    @property
    def is_bn(self) -> bool:
        return self in (LayerKind.BN_SCALE, LayerKind.BN_SHIFT)


@dataclass
class Param:
    name: str
    kind: LayerKind
    value: np.ndarray


class ParamSet:
    """Named parameter tensors in a stable order; names are unique."""

    def __init__(self, params: list[Param]):
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        self._params = list(params)
        self._index = {p.name: p for p in self._params}

    def __iter__(self):
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def __getitem__(self, name: str) -> Param:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def names(self) -> list[str]:
        return [p.name for p in self._params]

    def copy(self) -> "ParamSet":
        return ParamSet([Param(p.name, p.kind, p.value.copy()) for p in self._params])


class GradSet:
    """Gradient tensors mirroring a ParamSet entry for entry."""

    def __init__(self, params: ParamSet, grads: dict[str, np.ndarray]):
        missing = [n for n in params.names() if n not in grads]
        if missing:
            raise ValueError(f"gradients missing for parameters: {missing}")
        for p in params:
            if grads[p.name].shape != p.value.shape:
                raise ValueError(
                    f"gradient shape {grads[p.name].shape} != parameter shape "
                    f"{p.value.shape} for {p.name!r}"
                )
        self._params = params
        self._grads = {n: grads[n] for n in params.names()}

    def __getitem__(self, name: str) -> np.ndarray:
        return self._grads[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if value.shape != self._grads[name].shape:
            raise ValueError(f"gradient shape change for {name!r}")
        self._grads[name] = value

    def items(self):
        return ((n, self._grads[n]) for n in self._params.names())

    def kinds(self):
        return ((p.name, p.kind, self._grads[p.name]) for p in self._params)

    @property
    def params(self) -> ParamSet:
        return self._params

    def copy(self) -> "GradSet":
        return GradSet(self._params, {n: g.copy() for n, g in self._grads.items()})


class Mode(enum.Enum):
    TRAIN = "train"           # batch stats, EMA updated
    EVAL_EMA = "eval_ema"     # running stats, nothing updated
    EVAL_BATCH = "eval_batch"  # batch stats, EMA untouched


@dataclass
class BNState:
    """Running and last-batch statistics for each BN layer, keyed by layer name."""

    ema_mean: dict[str, np.ndarray]
    ema_var: dict[str, np.ndarray]
    batch_mean: dict[str, np.ndarray] = field(default_factory=dict)
    batch_var: dict[str, np.ndarray] = field(default_factory=dict)
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS

    def copy(self) -> "BNState":
        return BNState(
            ema_mean={k: v.copy() for k, v in self.ema_mean.items()},
            ema_var={k: v.copy() for k, v in self.ema_var.items()},
            batch_mean={k: v.copy() for k, v in self.batch_mean.items()},
            batch_var={k: v.copy() for k, v in self.batch_var.items()},
            momentum=self.momentum,
            eps=self.eps,
        )


@dataclass
class _BNCache:
    layer: str
    xhat: np.ndarray
    inv_std: np.ndarray  # per channel, for whichever stats normalized the batch
    used_batch_stats: bool


@dataclass
class ForwardCache:
    mode: Mode
    x: np.ndarray          # NCHW input
    conv1_in: np.ndarray
    bn1: _BNCache
    relu1_mask: np.ndarray
    conv2_in: np.ndarray
    bn2: _BNCache
    relu2_mask: np.ndarray
    pool_shape: tuple[int, int]
    head_in: np.ndarray    # pooled features fed to the linear head
    logits: np.ndarray


def init_params(seed: int) -> tuple[ParamSet, BNState]:
    """He-initialized parameters plus fresh BN running statistics."""
    rng = np.random.default_rng(seed)
    k = _KSIZE

    def he(shape, fan_in):
        return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)

    params = ParamSet(
        [
            Param("conv1.kernel", LayerKind.CONV_KERNEL, he((_CH1, 3, k, k), 3 * k * k)),
            Param("bn1.scale", LayerKind.BN_SCALE, np.ones(_CH1)),
            Param("bn1.shift", LayerKind.BN_SHIFT, np.zeros(_CH1)),
            Param("conv2.kernel", LayerKind.CONV_KERNEL, he((_CH2, _CH1, k, k), _CH1 * k * k)),
            Param("bn2.scale", LayerKind.BN_SCALE, np.ones(_CH2)),
            Param("bn2.shift", LayerKind.BN_SHIFT, np.zeros(_CH2)),
            Param("head.weight", LayerKind.LINEAR_WEIGHT, he((_NCLASS, _CH2), _CH2)),
            Param("head.bias", LayerKind.LINEAR_BIAS, np.zeros(_NCLASS)),
        ]
    )
    bn_state = BNState(
        ema_mean={"bn1": np.zeros(_CH1), "bn2": np.zeros(_CH2)},
        ema_var={"bn1": np.ones(_CH1), "bn2": np.ones(_CH2)},
    )
    return params, bn_state


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _bn_forward(x, layer, params, bn_state, mode):
    gamma = params[f"{layer}.scale"].value[None, :, None, None]
    beta = params[f"{layer}.shift"].value[None, :, None, None]
    use_batch = mode in (Mode.TRAIN, Mode.EVAL_BATCH)
    if use_batch:
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))  # biased, matching the EMA accumulator
        bn_state.batch_mean[layer] = mean.copy()
        bn_state.batch_var[layer] = var.copy()
        if mode is Mode.TRAIN:
            m = bn_state.momentum
            bn_state.ema_mean[layer] = (1 - m) * bn_state.ema_mean[layer] + m * mean
            bn_state.ema_var[layer] = (1 - m) * bn_state.ema_var[layer] + m * var
    else:
        mean = bn_state.ema_mean[layer]
        var = bn_state.ema_var[layer]
    inv_std = 1.0 / np.sqrt(var + bn_state.eps)
    xhat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    cache = _BNCache(layer=layer, xhat=xhat, inv_std=inv_std, used_batch_stats=use_batch)
    return gamma * xhat + beta, cache


def _bn_backward(dy, cache: _BNCache, params: ParamSet):
    gamma = params[f"{cache.layer}.scale"].value[None, :, None, None]
    dgamma = (dy * cache.xhat).sum(axis=(0, 2, 3))
    dbeta = dy.sum(axis=(0, 2, 3))
    dxhat = dy * gamma
    inv = cache.inv_std[None, :, None, None]
    if cache.used_batch_stats:
        # mean/variance were functions of the batch; fold their gradients back in
        m1 = dxhat.mean(axis=(0, 2, 3), keepdims=True)
        m2 = (dxhat * cache.xhat).mean(axis=(0, 2, 3), keepdims=True)
        dx = inv * (dxhat - m1 - cache.xhat * m2)
    else:
        dx = inv * dxhat
    return dx, dgamma, dbeta


def forward(
    params: ParamSet, bn_state: BNState, batch: np.ndarray, mode: Mode
) -> tuple[np.ndarray, ForwardCache]:
    """Run the network on a (B, H, W, 3) batch; returns logits and the cache for backward."""
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 4 or x.shape[3] != 3:
        raise ValueError(f"expected batch of shape (B, H, W, 3), got {x.shape}")
    if mode in (Mode.TRAIN, Mode.EVAL_BATCH) and x.shape[0] < 2:
        raise ValueError(
            f"mode {mode.value} needs batch size >= 2 for batch statistics, got {x.shape[0]}"
        )
    x = np.ascontiguousarray(x.transpose(0, 3, 1, 2))

    c1 = conv2d_forward(x, params["conv1.kernel"].value, stride=1, pad=1)
    b1, bn1_cache = _bn_forward(c1, "bn1", params, bn_state, mode)
    r1 = np.maximum(b1, 0.0)

    c2 = conv2d_forward(r1, params["conv2.kernel"].value, stride=2, pad=1)
    b2, bn2_cache = _bn_forward(c2, "bn2", params, bn_state, mode)
    r2 = np.maximum(b2, 0.0)

    pooled = r2.mean(axis=(2, 3))
    logits = pooled @ params["head.weight"].value.T + params["head.bias"].value

    cache = ForwardCache(
        mode=mode,
        x=x,
        conv1_in=x,
        bn1=bn1_cache,
        relu1_mask=b1 > 0.0,
        conv2_in=r1,
        bn2=bn2_cache,
        relu2_mask=b2 > 0.0,
        pool_shape=r2.shape[2:],
        head_in=pooled,
        logits=logits,
    )
    return logits, cache


def backward(params: ParamSet, cache: ForwardCache, loss_grad_on_logits: np.ndarray) -> GradSet:
    """Exact reverse-mode gradients for every parameter given dL/dlogits."""
    dz = np.asarray(loss_grad_on_logits, dtype=np.float64)
    if dz.shape != cache.logits.shape:
        raise ValueError(f"loss gradient shape {dz.shape} != logits shape {cache.logits.shape}")

    dw_head = dz.T @ cache.head_in
    db_head = dz.sum(axis=0)
    dpooled = dz @ params["head.weight"].value

    ph, pw = cache.pool_shape
    dr2 = np.broadcast_to(dpooled[:, :, None, None], dpooled.shape + (ph, pw)) / (ph * pw)
    db2 = dr2 * cache.relu2_mask
    dc2, dg2, dbeta2 = _bn_backward(db2, cache.bn2, params)
    dr1, dw2 = conv2d_backward(cache.conv2_in, params["conv2.kernel"].value, dc2, stride=2, pad=1)

    db1 = dr1 * cache.relu1_mask
    dc1, dg1, dbeta1 = _bn_backward(db1, cache.bn1, params)
    _, dw1 = conv2d_backward(cache.conv1_in, params["conv1.kernel"].value, dc1, stride=1, pad=1)

    return GradSet(
        params,
        {
            "conv1.kernel": dw1,
            "bn1.scale": dg1,
            "bn1.shift": dbeta1,
            "conv2.kernel": dw2,
            "bn2.scale": dg2,
            "bn2.shift": dbeta2,
            "head.weight": dw_head,
            "head.bias": db_head,
        },
    )
