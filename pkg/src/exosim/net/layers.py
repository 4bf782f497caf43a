"""Vectorized numpy building blocks for the intent classifier.

Every forward returns (output, cache); the matching backward consumes the
upstream gradient plus that cache and returns input/parameter gradients.
Temporal layout is (batch, time, channels) throughout.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv1d_forward(x, w, b):
    """Same-padded 1-D convolution. x: (B,L,Cin), w: (k,Cin,Cout), b: (Cout,)."""
    k, c_in, c_out = w.shape
    if x.shape[2] != c_in:
        raise ValueError(f"conv input has {x.shape[2]} channels, kernel expects {c_in}")
    pad = (k - 1) // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    # (B, L, Cin, k) -> (B, L, k*Cin) matching w.reshape(k*Cin, Cout)
    cols = sliding_window_view(xp, k, axis=1).transpose(0, 1, 3, 2)
    cols = np.ascontiguousarray(cols).reshape(x.shape[0], x.shape[1], k * c_in)
    out = cols @ w.reshape(k * c_in, c_out) + b
    return out, (cols, x.shape, w.shape)


def conv1d_backward(dout, cache, w):
    cols, x_shape, w_shape = cache
    k, c_in, c_out = w_shape
    b_sz, length, _ = x_shape
    pad = (k - 1) // 2
    flat_cols = cols.reshape(b_sz * length, k * c_in)
    flat_dout = dout.reshape(b_sz * length, c_out)
    dw = (flat_cols.T @ flat_dout).reshape(k, c_in, c_out)
    db = dout.sum(axis=(0, 1))
    dcols = (flat_dout @ w.reshape(k * c_in, c_out).T).reshape(b_sz, length, k, c_in)
    dxp = np.zeros((b_sz, length + 2 * pad, c_in), dtype=dout.dtype)
    for j in range(k):
        dxp[:, j : j + length, :] += dcols[:, :, j, :]
    return dxp[:, pad : pad + length, :], dw, db


def batchnorm_forward(x, gamma, beta, running_mean, running_var, momentum, eps, train):
    """Per-channel normalization over (batch, time).

    In train mode the running statistics are updated in place.
    """
    if train:
        mu = x.mean(axis=(0, 1))
        var = x.var(axis=(0, 1))
        running_mean *= momentum
        running_mean += (1.0 - momentum) * mu
        running_var *= momentum
        running_var += (1.0 - momentum) * var
    else:
        mu, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv_std
    return gamma * xhat + beta, (xhat, inv_std, gamma, train)


def batchnorm_backward(dout, cache):
    xhat, inv_std, gamma, train = cache
    dgamma = (dout * xhat).sum(axis=(0, 1))
    dbeta = dout.sum(axis=(0, 1))
    dxhat = dout * gamma
    if not train:
        return dxhat * inv_std, dgamma, dbeta
    n = dout.shape[0] * dout.shape[1]
    dx = (
        inv_std
        / n
        * (
            n * dxhat
            - dxhat.sum(axis=(0, 1))
            - xhat * (dxhat * xhat).sum(axis=(0, 1))
        )
    )
    return dx, dgamma, dbeta


def maxpool_forward(x, size):
    """Non-overlapping temporal max pooling; trailing remainder dropped."""
    b_sz, length, ch = x.shape
    l_out = length // size
    xt = x[:, : l_out * size, :].reshape(b_sz, l_out, size, ch)
    idx = xt.argmax(axis=2)
    out = np.take_along_axis(xt, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return out, (idx, x.shape, size)


def maxpool_backward(dout, cache):
    idx, x_shape, size = cache
    b_sz, length, ch = x_shape
    l_out = length // size
    dxt = np.zeros((b_sz, l_out, size, ch), dtype=dout.dtype)
    np.put_along_axis(dxt, idx[:, :, None, :], dout[:, :, None, :], axis=2)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, : l_out * size, :] = dxt.reshape(b_sz, l_out * size, ch)
    return dx


def leaky_relu_forward(x, slope):
    out = np.where(x >= 0, x, slope * x)
    return out, (x, slope)


def leaky_relu_backward(dout, cache):
    x, slope = cache
    return dout * np.where(x >= 0, 1.0, slope)


def dropout_forward(x, rate, rng, train):
    """Inverted dropout; identity when not training or rate is 0."""
    if not train or rate <= 0:
        return x, None
    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dout, mask):
    if mask is None:
        return dout
    return dout * mask


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x, wx, wh, b):
    """Single-layer LSTM; returns the final hidden state.

    x: (B,T,D); wx: (D,4H); wh: (H,4H); b: (4H,). Gate order is i, f, o, g.
    The input projection runs as one matmul over all timesteps.
    """
    b_sz, t_len, d_in = x.shape
    hidden = wh.shape[0]
    xw = (x.reshape(b_sz * t_len, d_in) @ wx).reshape(b_sz, t_len, 4 * hidden) + b
    h = np.zeros((b_sz, hidden), dtype=x.dtype)
    c = np.zeros((b_sz, hidden), dtype=x.dtype)
    steps = []
    for t in range(t_len):
        z = xw[:, t, :] + h @ wh
        gates = _sigmoid(z[:, : 3 * hidden])
        i = gates[:, :hidden]
        f = gates[:, hidden : 2 * hidden]
        o = gates[:, 2 * hidden :]
        g = np.tanh(z[:, 3 * hidden :])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        steps.append((h, c, i, f, o, g, tanh_c))
        h = o * tanh_c
        c = c_new
    return h, (steps, x, wx, wh)


def lstm_backward(dh_last, cache):
    steps, x, wx, wh = cache
    b_sz, t_len, d_in = x.shape
    hidden = wh.shape[0]
    dwh = np.zeros_like(wh)
    dzs = np.empty((b_sz, t_len, 4 * hidden), dtype=dh_last.dtype)
    dh = dh_last
    dc = np.zeros_like(dh_last)
    for t in range(t_len - 1, -1, -1):
        h_prev, c_prev, i, f, o, g, tanh_c = steps[t]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        dz = dzs[:, t, :]
        dz[:, :hidden] = dc * g * i * (1.0 - i)
        dz[:, hidden : 2 * hidden] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * hidden : 3 * hidden] = do * o * (1.0 - o)
        dz[:, 3 * hidden :] = dc * i * (1.0 - g**2)
        dwh += h_prev.T @ dz
        dh = dz @ wh.T
        dc = dc * f
    flat_dz = dzs.reshape(b_sz * t_len, 4 * hidden)
    dwx = x.reshape(b_sz * t_len, d_in).T @ flat_dz
    db = flat_dz.sum(axis=0)
    dx = (flat_dz @ wx.T).reshape(x.shape)
    return dx, dwx, dwh, db


def dense_forward(x, w, b):
    if x.shape[1] != w.shape[0]:
        raise ValueError(f"dense input width {x.shape[1]} != weight rows {w.shape[0]}")
    return x @ w + b, x


def dense_backward(dout, x, w):
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, y):
    """Mean cross-entropy loss and gradient w.r.t. logits. y: int labels."""
    probs = softmax(logits)
    n = logits.shape[0]
    loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    return loss, dlogits / n, probs
