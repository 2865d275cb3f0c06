"""Deterministic RNG stream derivation.

Every random draw in this package comes from a ``numpy.random.Generator``
backed by PCG64, seeded through ``numpy.random.SeedSequence``. Independent
streams are derived from a single 64-bit master seed plus an integer path,
so any unit of work (a tree, a replicate, a (tree, variable) permutation)
gets its own stream regardless of scheduling. The generator algorithm
(PCG64) is part of the reproducibility contract and fixed per release.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Stream tags: first path component after the master seed. Keeps streams
# for different purposes disjoint even when their remaining indices collide.
TAG_BOOTSTRAP = 1
TAG_TREE_GROWTH = 2
TAG_PERMUTATION = 3
TAG_OVERSAMPLE = 4
TAG_SIMULATION = 5
TAG_BENCHMARK = 6
TAG_FOLDS = 7
TAG_CANDIDATE = 8
TAG_EXPERIMENT = 9

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """A 64-bit master seed; the single source of all randomness."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")

    def derive(self, *path: int) -> np.random.Generator:
        """Return an independent generator for the given integer path."""
        seq = np.random.SeedSequence([self.master_seed, *[p & _MASK64 for p in path]])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, *path: int) -> "SeedSpec":
        """Derive a new 64-bit master seed for a sub-experiment."""
        seq = np.random.SeedSequence([self.master_seed, *[p & _MASK64 for p in path]])
        return SeedSpec(int(seq.generate_state(1, np.uint64)[0]))


def as_seed(seed: "SeedSpec | int") -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))
