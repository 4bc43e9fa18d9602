"""Reproducible inverse-transform sampling of the centered increments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TailModel


@dataclass(frozen=True)
class SamplerState:
    """A position in a PCG64 stream: ``(seed, stream)`` picks the stream and
    ``counter`` the number of 64-bit outputs already consumed."""

    seed: int
    stream: int = 0
    counter: int = 0

    def generator(self) -> np.random.Generator:
        bg = np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream,)))
        if self.counter:
            bg.advance(self.counter)
        return np.random.Generator(bg)

    def after(self, draws: int) -> "SamplerState":
        return SamplerState(self.seed, self.stream, self.counter + draws)

    def substream(self, index: int) -> "SamplerState":
        """Disjoint stream for worker ``index``."""
        return SamplerState(self.seed, self.stream * 1_000_003 + index + 1, 0)


def uniform_levels(rng: np.random.Generator, out: np.ndarray) -> np.ndarray:
    """Fill ``out`` with levels in (0, 1] (``1 - U`` keeps zero out)."""
    rng.random(out=out)
    np.subtract(1.0, out, out=out)
    return out


def sample_raw(model: TailModel, count: int, state: SamplerState) -> np.ndarray:
    """Draws of the non-negative ``xi'``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    buf = np.empty(count)
    return model.isf_inplace(uniform_levels(state.generator(), buf))


def sample(model: TailModel, count: int, state: SamplerState) -> np.ndarray:
    """Centered draws ``xi = F^{-1}(U) - m``."""
    out = sample_raw(model, count, state)
    out -= model.mean
    return out
