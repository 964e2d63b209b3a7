"""Seeded i.i.d. innovation streams with mean 0 and variance 1.

Every replication r gets its own counter-based Philox stream keyed by
(master seed, r).  All components of one replication read the same
materialized window, so the index eps_{n-i} addresses the same realized
value in every filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Distribution",
    "NoiseSpec",
    "SeedPolicy",
    "NoiseWindow",
    "generate_noise",
    "noise_window",
]

_SQRT3 = float(np.sqrt(3.0))


class Distribution(str, Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    CENTERED_UNIFORM = "uniform"
    STANDARDIZED_EXPONENTIAL = "exponential"


_FOURTH_MOMENT = {
    Distribution.GAUSSIAN: 3.0,
    Distribution.RADEMACHER: 1.0,
    Distribution.CENTERED_UNIFORM: 9.0 / 5.0,
    Distribution.STANDARDIZED_EXPONENTIAL: 9.0,
}


@dataclass(frozen=True)
class NoiseSpec:
    """Innovation law; every built-in has finite moments of all orders."""

    distribution: Distribution = Distribution.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "distribution", Distribution(self.distribution))

    @property
    def fourth_moment(self) -> float:
        return _FOURTH_MOMENT[self.distribution]

    @property
    def third_moment(self) -> float:
        return 2.0 if self.distribution is Distribution.STANDARDIZED_EXPONENTIAL else 0.0

    def finite_moment(self, p: float) -> bool:
        return True

    def moment(self, p: int) -> float:
        """Raw moment E eps^p."""
        p = int(p)
        if p < 0:
            raise ValueError("moment order must be nonnegative")
        dist = self.distribution
        if dist is Distribution.STANDARDIZED_EXPONENTIAL:
            # E(E - 1)^p is the number of derangements of p items
            prev, cur = 1, 0
            if p == 0:
                return 1.0
            for q in range(2, p + 1):
                prev, cur = cur, (q - 1) * (cur + prev)
            return float(cur)
        if p % 2:
            return 0.0
        if dist is Distribution.GAUSSIAN:
            return float(math.prod(range(p - 1, 0, -2)))
        if dist is Distribution.RADEMACHER:
            return 1.0
        return 3.0 ** (p // 2) / (p + 1)

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        dist = self.distribution
        if dist is Distribution.GAUSSIAN:
            return rng.standard_normal(size)
        if dist is Distribution.RADEMACHER:
            return 2.0 * rng.integers(0, 2, size=size).astype(float) - 1.0
        if dist is Distribution.CENTERED_UNIFORM:
            return rng.uniform(-_SQRT3, _SQRT3, size)
        return rng.standard_exponential(size) - 1.0


@dataclass(frozen=True)
class SeedPolicy:
    """Derives one independent stream per replication from a 64-bit master seed."""

    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master seed must be an unsigned 64-bit integer")

    def generator(self, r: int) -> np.random.Generator:
        if r < 0:
            raise ValueError("replication index must be nonnegative")
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(r),))
        return np.random.Generator(np.random.Philox(ss))

    def history_generator(self, r: int) -> np.random.Generator:
        """Stream for the aggregated distant past of replication r."""
        if r < 0:
            raise ValueError("replication index must be nonnegative")
        ss = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(r), 1))
        return np.random.Generator(np.random.Philox(ss))


def generate_noise(spec: NoiseSpec, policy: SeedPolicy, r: int, length: int) -> np.ndarray:
    """The first ``length`` draws of replication ``r``'s stream."""
    if length < 1:
        raise ValueError("noise length must be at least 1")
    return spec.draw(policy.generator(r), length)


@dataclass
class NoiseWindow:
    """Materialized innovations eps_t for t = start, ..., start + L - 1.

    ``values`` has shape (L,) or (R, L) for a batch of replications.
    """

    values: np.ndarray
    start: int

    @property
    def stop(self) -> int:
        """Last covered time index (inclusive)."""
        return self.start + self.values.shape[-1] - 1

    def covers(self, lo: int, hi: int) -> bool:
        return self.start <= lo and hi <= self.stop

    def take(self, lo: int, hi: int) -> np.ndarray:
        """eps_lo..eps_hi (inclusive) along the last axis."""
        if not self.covers(lo, hi):
            raise ValueError(
                f"noise window [{self.start}, {self.stop}] does not cover [{lo}, {hi}]"
            )
        return self.values[..., lo - self.start : hi - self.start + 1]


def noise_window(spec: NoiseSpec, policy: SeedPolicy, replications, start: int, stop: int) -> NoiseWindow:
    """Window eps_start..eps_stop for one replication index or a sequence of them."""
    length = stop - start + 1
    if np.ndim(replications) == 0:
        return NoiseWindow(generate_noise(spec, policy, int(replications), length), start)
    rows = [generate_noise(spec, policy, int(r), length) for r in replications]
    return NoiseWindow(np.stack(rows), start)
