"""Synthetic data: the Monte Carlo simulation design and four benchmark
generators (ringnorm, twonorm, threenorm, circle-in-a-square)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .rng import TAG_BENCHMARK, TAG_SIMULATION, SeedSpec

BENCHMARK_NAMES = ("ringnorm", "twonorm", "threenorm", "circle")


@dataclass(frozen=True)
class SimulationConfig:
    """Imbalanced two-class design: majority rows are standard normal in
    all columns, minority rows get block-wise mean shifts (strong,
    moderate, weak, noise)."""

    N: int
    IR: float
    effect_means: tuple = (1.0, 0.75, 0.5, 0.0)
    block_sizes: tuple = (5, 5, 5, 15)
    sigma: float = 1.0

    def __post_init__(self):
        if self.N < 10:
            raise ValueError("N must be at least 10")
        if self.IR < 1:
            raise ValueError("IR must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if len(self.effect_means) != len(self.block_sizes):
            raise ValueError("effect_means and block_sizes lengths differ")
        if not all(math.isfinite(m) for m in self.effect_means):
            raise ValueError("effect means must be finite")

    @property
    def p(self) -> int:
        return int(sum(self.block_sizes))

    @property
    def n1(self) -> int:
        # round half up, floored at 2 so AUC stays defined
        return max(2, int(math.floor(self.N / (self.IR + 1) + 0.5)))

    @property
    def n0(self) -> int:
        return self.N - self.n1

    def achieved_ir(self) -> float:
        return self.n0 / self.n1


def gen_simulation(config: SimulationConfig, seed: SeedSpec) -> Dataset:
    """Generate one simulated dataset; majority rows first, then minority."""
    rng = seed.derive(TAG_SIMULATION)
    p = config.p
    n0, n1 = config.n0, config.n1
    if n0 < 1:
        raise ValueError(f"N={config.N} too small for IR={config.IR}")
    means = np.repeat(np.asarray(config.effect_means, dtype=np.float64),
                      np.asarray(config.block_sizes, dtype=np.int64))
    X0 = rng.normal(0.0, config.sigma, size=(n0, p))
    X1 = rng.normal(0.0, config.sigma, size=(n1, p)) + means
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n0, dtype=np.int8), np.ones(n1, dtype=np.int8)])
    return Dataset(X, y)


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    n: int
    d: int = 10
    radius: float | None = None  # circle only; None -> half-volume policy

    def __post_init__(self):
        if self.name not in BENCHMARK_NAMES:
            raise ValueError(f"unknown benchmark {self.name!r}; choose from {BENCHMARK_NAMES}")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if self.d < 2:
            raise ValueError("d must be at least 2")


def circle_radius(d: int, volume_fraction: float = 0.5) -> float:
    """Radius of the origin-centered d-ball whose volume equals
    ``volume_fraction`` of the cube [-1, 1]^d.

    For d > ~5 this radius exceeds 1, so part of the ball pokes out of the
    cube and the realized inside-fraction of uniform cube draws falls
    below ``volume_fraction`` (at d=10 the half-volume radius yields an
    inside fraction near 1/3, i.e. imbalance ratio about 2.1).
    """
    unit_ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return (volume_fraction * 2 ** d / unit_ball) ** (1 / d)


def gen_benchmark(spec: BenchmarkSpec, seed: SeedSpec) -> Dataset:
    """Generate one benchmark dataset; class-0 rows first where classes are
    drawn per-class (normal mixtures), positional for circle."""
    rng = seed.derive(TAG_BENCHMARK)
    n, d = spec.n, spec.d
    a = 2.0 / math.sqrt(d)
    n1 = n // 2
    n0 = n - n1

    if spec.name == "twonorm":
        X0 = rng.normal(size=(n0, d)) - a
        X1 = rng.normal(size=(n1, d)) + a
    elif spec.name == "ringnorm":
        X0 = rng.normal(0.0, 2.0, size=(n0, d))
        X1 = rng.normal(size=(n1, d)) + a
    elif spec.name == "threenorm":
        comp = rng.integers(0, 2, size=n0)
        X0 = rng.normal(size=(n0, d)) + np.where(comp[:, None] == 0, a, -a)
        alternating = a * np.where(np.arange(d) % 2 == 0, 1.0, -1.0)
        X1 = rng.normal(size=(n1, d)) + alternating
    else:  # circle
        r = spec.radius if spec.radius is not None else circle_radius(d)
        X = rng.uniform(-1.0, 1.0, size=(n, d))
        y = (np.linalg.norm(X, axis=1) <= r).astype(np.int8)
        return Dataset(X, y)

    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n0, dtype=np.int8), np.ones(n1, dtype=np.int8)])
    return Dataset(X, y)
