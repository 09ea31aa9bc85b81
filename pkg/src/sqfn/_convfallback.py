"""Pure-numpy fallback for the direct-convolution core.

Same contract as the compiled module in ``_convcore.pyx``; selected at
import time when the extension is unavailable.
"""
import numpy as np

BACKEND = "numpy"


def conv_full_1d(f, k):
    return np.convolve(np.asarray(f, float), np.asarray(k, float), mode="full")


def conv_full_2d(f, k):
    f = np.asarray(f, float)
    k = np.asarray(k, float)
    nfx, nfy = f.shape
    nkx, nky = k.shape
    out = np.zeros((nfx + nkx - 1, nfy + nky - 1))
    # Accumulate shifted copies; O(kernel size) passes over f.
    for p in range(nkx):
        for q in range(nky):
            out[p : p + nfx, q : q + nfy] += k[p, q] * f
    return out
