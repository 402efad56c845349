"""Numpy implementations of the hot kernels.

Same contracts as the compiled versions in ``_kernels.pyx``; used as the
fallback when the extension is not built (and as the reference in the
kernel benchmark).
"""

import numpy as np

BACKEND = "python"


def rir_accumulate(times, amps, num_taps, half_width=40):
    """Accumulate fractional-delay pulses into an impulse response.

    Each (time, amp) pair places ``amp`` at fractional sample position
    ``time`` using a Hann-windowed sinc of ``2*half_width + 1`` taps.

    Parameters
    ----------
    times : float64 array, arrival times in samples
    amps : float64 array, pulse amplitudes
    num_taps : int, output length
    half_width : int, half-width of the windowed-sinc interpolator

    Returns
    -------
    float64 array of shape (num_taps,)
    """
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    amps = np.asarray(amps, dtype=np.float64).reshape(-1)
    if times.shape != amps.shape:
        raise ValueError("times and amps must have equal length")
    h = np.zeros(num_taps)
    width = 2 * half_width + 1
    chunk = max(1, 4_000_000 // width)
    offsets = np.arange(width)
    for lo in range(0, times.size, chunk):
        t = times[lo : lo + chunk]
        a = amps[lo : lo + chunk]
        first = np.ceil(t - half_width).astype(np.int64)
        idx = first[:, None] + offsets
        x = idx - t[:, None]
        w = 0.5 * (1.0 + np.cos(np.pi * x / half_width))
        vals = a[:, None] * w * np.sinc(x)
        valid = (idx >= 0) & (idx < num_taps) & (np.abs(x) <= half_width)
        h += np.bincount(
            idx[valid], weights=vals[valid], minlength=num_taps
        )[:num_taps]
    return h


def conv2x1_forward(x, w, b):
    """Valid 2x1 convolution along the mic axis.

    x: (B, H, K, C) activations, w: (2, C, F) filters, b: (F,) bias.
    Returns (B, H-1, K, F): out[b,i,k,f] = bias[f]
        + sum_c x[b,i,k,c]*w[0,c,f] + x[b,i+1,k,c]*w[1,c,f]
    """
    if x.shape[1] < 2:
        raise ValueError("conv2x1 needs at least 2 rows in the mic axis")
    z0 = x @ w[0]
    z1 = x @ w[1]
    return z0[:, :-1] + z1[:, 1:] + b


def conv2x1_backward(x, w, dy):
    """Gradients of conv2x1_forward.

    Returns (dx, dw, db) with shapes matching (x, w, bias).
    """
    cin = x.shape[3]
    f = w.shape[2]
    dx = np.zeros_like(x)
    dx[:, :-1] += dy @ w[0].T
    dx[:, 1:] += dy @ w[1].T
    dy_flat = dy.reshape(-1, f)
    dw = np.empty_like(w)
    dw[0] = x[:, :-1].reshape(-1, cin).T @ dy_flat
    dw[1] = x[:, 1:].reshape(-1, cin).T @ dy_flat
    db = dy_flat.sum(axis=0)
    return dx, dw, db
