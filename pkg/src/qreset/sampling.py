"""Seeded initial-state sampling.

Every sample index owns its own generator, spawned from ``(seed, index)``, so a
draw never depends on how many other samples were taken or in what order.
"""

from __future__ import annotations

import numpy as np

MODES = ("ball", "sphere")


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_initial_state(rng: np.random.Generator, mode: str = "ball") -> np.ndarray:
    """Uniform Bloch vector in the solid ball or on its surface."""
    if mode not in MODES:
        raise ValueError(f"sampling mode must be one of {MODES}, got {mode!r}")
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    if mode == "sphere":
        return direction
    return direction * rng.uniform() ** (1 / 3)


def sample_bloch_batch(seed: int, n: int, mode: str = "ball", start: int = 0) -> np.ndarray:
    return np.array([sample_initial_state(sample_rng(seed, i), mode) for i in range(start, start + n)]).reshape(n, 3)
