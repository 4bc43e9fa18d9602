"""Evaluation grids.

"For all large enough x" is read as the tail half of a geometric grid
``x0 * 2**j``; defaults are x0 = 1e3 with 24 points (up to ~8.4e9).
"""

from __future__ import annotations

import numpy as np

DEFAULT_X0 = 1e3
DEFAULT_POINTS = 24
TIE_SLACK = 1e-12


def geometric_grid(x0: float = DEFAULT_X0, points: int = DEFAULT_POINTS, ratio: float = 2.0) -> np.ndarray:
    return x0 * ratio ** np.arange(points, dtype=float)


def tail_start(n: int) -> int:
    return n // 2


def tail_half(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    return grid[tail_start(len(grid)):]


def non_increasing(values, slack: float = TIE_SLACK) -> bool:
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return True
    with np.errstate(invalid="ignore"):
        steps = v[1:] - (v[:-1] + slack)
    # inf - inf is nan: an infinite deviation staying infinite is not an increase
    both_inf = np.isinf(v[1:]) & np.isinf(v[:-1])
    return bool(np.all((steps <= 0) | both_inf))
