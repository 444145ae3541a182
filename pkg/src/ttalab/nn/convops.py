"""Convolution ops with a compiled core and a pure-numpy fallback.

The backend is chosen once at import: the Cython extension when it built,
numpy otherwise. ``TTALAB_BACKEND=python`` or ``=compiled`` forces the choice
(the latter raises if the extension is unavailable). Both paths implement the
same zero-padded strided convolution on float64 NCHW tensors and agree to
~1e-13; see benchmarks/bench_conv.py for the speed comparison.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from ttalab.nn import _kernels as _ext
except ImportError:
    _ext = None

_forced = os.environ.get("TTALAB_BACKEND", "").strip().lower()
if _forced == "python":
    _ext = None
elif _forced == "compiled" and _ext is None:
    raise ImportError("TTALAB_BACKEND=compiled but the ttalab.nn._kernels extension is not built")
elif _forced not in ("", "python", "compiled"):
    raise ValueError(f"TTALAB_BACKEND must be 'python' or 'compiled', got {_forced!r}")

BACKEND = "compiled" if _ext is not None else "python"


def _out_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def _windows(x: np.ndarray, kh: int, kw: int, stride: int, pad: int) -> np.ndarray:
    """Read-only (B, C, OH, OW, kh, kw) view over the zero-padded input."""
    b, c, h, w = x.shape
    oh, ow = _out_size(h, kh, stride, pad), _out_size(w, kw, stride, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    s = xp.strides
    return np.lib.stride_tricks.as_strided(
        xp,
        shape=(b, c, oh, ow, kh, kw),
        strides=(s[0], s[1], s[2] * stride, s[3] * stride, s[2], s[3]),
        writeable=False,
    )


def _forward_py(x: np.ndarray, w: np.ndarray, stride: int, pad: int) -> np.ndarray:
    win = _windows(x, w.shape[2], w.shape[3], stride, pad)
    return np.einsum("bcijkl,ockl->boij", win, w, optimize=True)


def _backward_py(x, w, g, stride: int, pad: int):
    b, c, h, wd = x.shape
    _, _, kh, kw = w.shape
    oh, ow = g.shape[2], g.shape[3]
    win = _windows(x, kh, kw, stride, pad)
    dw = np.einsum("bcijkl,boij->ockl", win, g, optimize=True)
    dcol = np.einsum("boij,ockl->bcijkl", g, w, optimize=True)
    dxp = np.zeros((b, c, h + 2 * pad, wd + 2 * pad))
    for ki in range(kh):
        for kj in range(kw):
            dxp[:, :, ki : ki + oh * stride : stride, kj : kj + ow * stride : stride] += dcol[
                :, :, :, :, ki, kj
            ]
    return dxp[:, :, pad : pad + h, pad : pad + wd], dw


def conv2d_forward(x: np.ndarray, w: np.ndarray, stride: int = 1, pad: int = 0) -> np.ndarray:
    """Strided zero-padded convolution: (B,C,H,W) x (O,C,KH,KW) -> (B,O,OH,OW)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    if _ext is not None:
        return _ext.conv2d_forward(x, w, stride, pad)
    return _forward_py(x, w, stride, pad)


def conv2d_backward(x: np.ndarray, w: np.ndarray, grad_out: np.ndarray, stride: int = 1, pad: int = 0):
    """Gradients (dx, dw) of conv2d_forward given upstream grad_out."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    g = np.ascontiguousarray(grad_out, dtype=np.float64)
    if _ext is not None:
        return _ext.conv2d_backward(x, w, g, stride, pad)
    return _backward_py(x, w, g, stride, pad)
