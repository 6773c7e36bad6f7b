"""Counter-mode seed derivation and a matching scalar/vectorised uniform stream.

Every trial gets its own 64-bit seed ``derive_trial_seed(master, t)``.  The
draws of one trial are the SplitMix64 sequence started at that seed, so the
d-th draw is a pure function of ``(seed, d)``.  That lets the object-level
simulation (one ``CounterRng`` per trial) and the batched numpy engine produce
bit-identical uniforms.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASTER_SALT = 0x5153_4C5F_5345_4544  # "QSL_SEED"
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finaliser; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _master_key(master_seed: int) -> int:
    return mix64((master_seed & MASK64) ^ _MASTER_SALT)


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Seed of trial ``trial_index`` under ``master_seed``.

    ``mix64(key + (t + 1) * GOLDEN)`` is injective in ``t`` modulo 2**64
    because GOLDEN is odd and mix64 is a bijection.
    """
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    return mix64(_master_key(master_seed) + (trial_index + 1) * GOLDEN)


class CounterRng:
    """Seedable, splittable uniform stream (SplitMix64).

    Only ``random()`` is provided; that is the whole interface the simulation
    needs, and ``numpy.random.Generator`` satisfies it as well.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.counter = 0

    def random(self) -> float:
        self.counter += 1
        z = mix64(self.seed + self.counter * GOLDEN)
        return (z >> 11) * _INV53

    def split(self, index: int) -> "CounterRng":
        return CounterRng(derive_trial_seed(self.seed, index))

    def __repr__(self) -> str:
        return f"CounterRng(seed={self.seed:#018x}, counter={self.counter})"


# -- vectorised counterparts -------------------------------------------------

_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_GOLDEN = np.uint64(GOLDEN)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _U_M1
    z = z ^ (z >> np.uint64(27))
    z = z * _U_M2
    return z ^ (z >> np.uint64(31))


def derive_trial_seeds(master_seed: int, trial_indices: np.ndarray) -> np.ndarray:
    t = np.asarray(trial_indices, dtype=np.uint64)
    key = np.uint64(_master_key(master_seed))
    return _mix64_array(key + (t + np.uint64(1)) * _U_GOLDEN)


def uniform_block(seeds: np.ndarray, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start+count-1`` of every stream; shape (len(seeds), count).

    Row ``i`` equals ``[CounterRng(seeds[i]).random() for _ in ...]`` after
    skipping ``start`` draws.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    steps = np.arange(start + 1, start + count + 1, dtype=np.uint64) * _U_GOLDEN
    z = _mix64_array(seeds[:, None] + steps[None, :])
    return (z >> np.uint64(11)).astype(np.float64) * _INV53
