"""Compiled path loops.  Draws arrive as the raw ``xi'`` values; the
centering shift is applied on the fly."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def path_tallies(raw, n, shift, x):
    """Count paths of length ``n`` with ``S_n >= x`` and with ``max_{k<=n} S_k >= x``."""
    paths = raw.size // n
    hit_sum = 0
    hit_max = 0
    for p in range(paths):
        base = p * n
        s = 0.0
        top = -np.inf
        for k in range(n):
            s += raw[base + k] - shift
            if s > top:
                top = s
        if s >= x:
            hit_sum += 1
        if top >= x:
            hit_max += 1
    return hit_sum, hit_max


@njit(cache=True)
def path_sums(raw, n, shift, out):
    """``out[p] = S_n`` of path ``p``."""
    paths = raw.size // n
    for p in range(paths):
        base = p * n
        s = 0.0
        for k in range(n):
            s += raw[base + k] - shift
        out[p] = s
    return out
