"""Crude Monte Carlo and the big-jump main term for ``P(S_n >= x)``."""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..tails.model import TailModel
from ..tails.sampling import SamplerState, uniform_levels
from ..tails.zones import ap5_ratio, zone_flag_sigma, zone_flag_xlnn
from .kernels import path_sums, path_tallies

SHARD_REPS = 1_000_000
BLOCK_DRAWS = 1 << 20
DEFAULT_BUDGET = 5e10  # total draws per call

_CRUDE, _BIG_JUMP = 1, 2


class BudgetExceededError(ValueError):
    pass


class LowCountWarning(UserWarning):
    """Predicted probability too small for the requested replications."""


@dataclass
class EstimateRecord:
    n: int
    x: float
    estimator: str
    p_sum: float
    se_sum: float
    prediction: float
    reps: int
    seed: int
    p_max: float = math.nan
    se_max: float = math.nan
    zone_xlnn: float = math.nan
    zone_ap5: float = math.nan
    zone_sigma: float = math.nan
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def ratio_sum(self) -> float:
        return self.p_sum / self.prediction if self.prediction > 0 else math.nan

    @property
    def ratio_max(self) -> float:
        return self.p_max / self.prediction if self.prediction > 0 else math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratio_sum"] = self.ratio_sum
        d["ratio_max"] = self.ratio_max
        return d


def _stream_id(kind: int, n: int, shard: int) -> int:
    return (kind << 48) | (n << 20) | shard


def _shards(reps: int) -> list[tuple[int, int]]:
    out, start = [], 0
    while start < reps:
        size = min(SHARD_REPS, reps - start)
        out.append((len(out), size))
        start += size
    return out


def _check_budget(reps: int, n: int, budget: float) -> None:
    if reps * n > budget:
        raise BudgetExceededError(f"{reps} replications of length {n} exceed the budget of {budget:g} draws")


def _warn_low_count(prediction: float, reps: int, notes: list[str]) -> None:
    if prediction * reps < 100.0 * (1.0 - 1e-9):
        msg = f"predicted probability {prediction:.3g} is below 100/reps = {100.0 / reps:.3g}"
        notes.append(msg)
        warnings.warn(msg, LowCountWarning, stacklevel=3)


def _zone_fields(model: TailModel, n: int, x: float) -> dict:
    out = {"zone_xlnn": zone_flag_xlnn(n, x) if n > 1 else math.nan, "zone_ap5": math.nan, "zone_sigma": math.nan}
    if x >= model.x0 and x > 0:
        out["zone_ap5"] = ap5_ratio(model, n, x)
        if model.alpha is not None and model.alpha < -1:
            out["zone_sigma"] = zone_flag_sigma(model, n, x)
    return out


def _map(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*tasks)))


# --------------------------------------------------------------------------
# crude Monte Carlo


def _crude_shard(model: TailModel, n: int, x: float, size: int, seed: int, shard: int) -> tuple[int, int]:
    rng = SamplerState(seed, _stream_id(_CRUDE, n, shard)).generator()
    m = model.mean
    per_block = max(1, BLOCK_DRAWS // n)
    buf = np.empty(per_block * n)
    hs = hm = 0
    done = 0
    while done < size:
        paths = min(per_block, size - done)
        view = buf[: paths * n]
        raw = model.isf_inplace(uniform_levels(rng, view))
        a, b = path_tallies(raw, n, m, x)
        hs += a
        hm += b
        done += paths
    return hs, hm


def crude_mc(model: TailModel, n: int, x: float, reps: int, seed: int, jobs: int = 1,
             budget: float = DEFAULT_BUDGET) -> EstimateRecord:
    """Indicator means of ``S_n >= x`` and ``max_{k<=n} S_k >= x`` from the same paths."""
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be positive")
    _check_budget(reps, n, budget)
    t0 = time.perf_counter()
    prediction = n * model.sf(x)
    notes: list[str] = []
    _warn_low_count(prediction, reps, notes)
    tasks = [(model, n, x, size, seed, shard) for shard, size in _shards(reps)]
    tallies = _map(_crude_shard, tasks, jobs)
    hs = sum(t[0] for t in tallies)
    hm = sum(t[1] for t in tallies)
    p_s, p_m = hs / reps, hm / reps
    return EstimateRecord(
        n, float(x), "crude", p_s, math.sqrt(p_s * (1 - p_s) / reps), prediction, reps, seed,
        p_max=p_m, se_max=math.sqrt(p_m * (1 - p_m) / reps), wall_time=time.perf_counter() - t0, notes=notes,
        **_zone_fields(model, n, x),
    )


# --------------------------------------------------------------------------
# big-jump main term


def _big_jump_shard(model: TailModel, n: int, x: float, size: int, seed: int, shard: int,
                    window: float) -> tuple[float, float]:
    rng = SamplerState(seed, _stream_id(_BIG_JUMP, n, shard)).generator()
    m = model.mean
    k = n - 1
    per_block = max(1, BLOCK_DRAWS // k)
    buf = np.empty(per_block * k)
    sums = np.empty(per_block)
    acc, acc2 = [], []
    done = 0
    while done < size:
        paths = min(per_block, size - done)
        raw = model.isf_inplace(uniform_levels(rng, buf[: paths * k]))
        s = path_sums(raw, k, m, sums[:paths])
        w = model.sf(x - s + m)
        w[np.abs(s) > window] = 0.0
        acc.append(float(w.sum()))
        acc2.append(float(np.dot(w, w)))
        done += paths
    return math.fsum(acc), math.fsum(acc2)


def big_jump_main_term(model: TailModel, n: int, x: float, reps: int, N: float, seed: int, jobs: int = 1,
                       budget: float = DEFAULT_BUDGET) -> EstimateRecord:
    """``n E[P(xi >= x - S_{n-1}); |S_{n-1}| <= N sqrt(n)]`` with simulated ``S_{n-1}``.

    This is the main term of the single-big-jump approximation, not an
    unbiased estimator of ``P(S_n >= x)``.  ``P(xi >= y) = F(y + m)`` for the
    centered increment.
    """
    if N <= 0:
        raise ValueError(f"window multiplier N must be positive, got {N!r}")
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be positive")
    t0 = time.perf_counter()
    prediction = n * model.sf(x)
    window = N * math.sqrt(n)
    m = model.mean
    if n == 1:
        value = model.sf(x + m) if window >= 0 else 0.0
        return EstimateRecord(1, float(x), "big-jump", value, 0.0, prediction, reps, seed,
                              wall_time=time.perf_counter() - t0, **_zone_fields(model, n, x))
    _check_budget(reps, n - 1, budget)
    tasks = [(model, n, x, size, seed, shard, window) for shard, size in _shards(reps)]
    parts = _map(_big_jump_shard, tasks, jobs)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / reps
    var = max(s2 / reps - mean * mean, 0.0) * reps / max(reps - 1, 1)
    return EstimateRecord(n, float(x), "big-jump", n * mean, n * math.sqrt(var / reps), prediction, reps, seed,
                          wall_time=time.perf_counter() - t0, **_zone_fields(model, n, x))
