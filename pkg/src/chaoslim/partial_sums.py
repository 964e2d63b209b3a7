"""Normalized partial sums Y_N(t) = A(N)^-1 sum_{n <= [Nt]} X(n)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coefficients import Regime, RegimeError
from .covariance import exact_partial_sum_variance, long_run_sigma
from .process import ChaosProcessSpec

__all__ = [
    "NormalizationMode",
    "NormalizationPlan",
    "TimeGrid",
    "DEFAULT_GRID",
    "exact_variance_plan",
    "asymptotic_srd_plan",
    "asymptotic_lrd_plan",
    "lrd_scale",
    "calibrate_lrd_normalization",
    "partial_sum_process",
    "partial_sums_at",
]


class NormalizationMode(str, Enum):
    EXACT_VARIANCE = "exact"
    ASYMPTOTIC_SRD = "srd"
    ASYMPTOTIC_LRD = "lrd"


@dataclass(frozen=True)
class NormalizationPlan:
    """A(N) together with how it was obtained.

    ``c_hat`` is A(N) / (N^H L(N)^k) for LRD specs, a diagnostic of the
    constant in the asymptotic normalization.
    """

    mode: NormalizationMode
    value: float
    N: int
    c_hat: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", NormalizationMode(self.mode))
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"normalization A(N) must be positive and finite, got {self.value}")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing times in (0, 1] ending at 1; t maps to [Nt]."""

    points: tuple = (0.25, 0.5, 0.75, 1.0)

    def __post_init__(self):
        pts = tuple(float(t) for t in self.points)
        if not pts:
            raise ValueError("time grid is empty")
        if any(not (0.0 < t <= 1.0) for t in pts):
            raise ValueError("grid times must lie in (0, 1]")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("grid times must be strictly increasing")
        if pts[-1] != 1.0:
            raise ValueError("grid must include t = 1")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def ends(self, N: int) -> np.ndarray:
        """[N t] for every grid time (guarded against t*N landing a hair below an integer)."""
        return np.array([min(N, int(math.floor(N * t + 1e-9))) for t in self.points], dtype=np.int64)

    @classmethod
    def parse(cls, text: str) -> "TimeGrid":
        return cls(tuple(float(x) for x in text.split(",") if x.strip()))


DEFAULT_GRID = TimeGrid()


def exact_variance_plan(spec: ChaosProcessSpec, N: int) -> NormalizationPlan:
    """A(N)^2 = Var(sum_{n<=N} X(n)), so Var Y_N(1) = 1 exactly."""
    var = exact_partial_sum_variance(spec, N)
    if not var > 0:
        raise ValueError(f"partial-sum variance of {spec.label!r} is {var}, cannot normalize")
    return NormalizationPlan(NormalizationMode.EXACT_VARIANCE, math.sqrt(var), int(N))


def asymptotic_srd_plan(spec: ChaosProcessSpec, N: int) -> NormalizationPlan:
    """A(N) = sigma sqrt(N)."""
    return NormalizationPlan(NormalizationMode.ASYMPTOTIC_SRD, long_run_sigma(spec) * math.sqrt(N), int(N))


def lrd_scale(spec: ChaosProcessSpec, N: int) -> float:
    """N^H L(N)^k with H = 1 + k(d - 1/2)."""
    reg = spec.regime
    if reg.regime is not Regime.LRD:
        raise RegimeError(f"component {spec.label!r} is {reg.regime.value}, not LRD")
    L = spec.coeffs.L
    return float(N) ** reg.H * float(L(float(N))) ** spec.k


def asymptotic_lrd_plan(spec: ChaosProcessSpec, N: int, c: float) -> NormalizationPlan:
    """A(N) = c N^H L(N)^k."""
    return NormalizationPlan(NormalizationMode.ASYMPTOTIC_LRD, c * lrd_scale(spec, N), int(N), c)


def calibrate_lrd_normalization(spec: ChaosProcessSpec, N: int) -> NormalizationPlan:
    """Exact-variance plan for an LRD spec, with c_hat = A(N) / (N^H L(N)^k)."""
    scale = lrd_scale(spec, N)
    plan = exact_variance_plan(spec, N)
    return NormalizationPlan(plan.mode, plan.value, plan.N, plan.value / scale)


def partial_sums_at(path: np.ndarray, ends) -> np.ndarray:
    """sum_{n <= e} X(n) for each end point e (0 gives 0); leading axes kept."""
    path = np.asarray(path, dtype=float)
    ends = np.asarray(ends, dtype=np.int64)
    if np.any(ends < 0) or np.any(ends > path.shape[-1]):
        raise ValueError("partial-sum end points must lie in [0, N]")
    csum = np.concatenate([np.zeros(path.shape[:-1] + (1,)), np.cumsum(path, axis=-1)], axis=-1)
    return csum[..., ends]


def partial_sum_process(path: np.ndarray, plan: NormalizationPlan, grid: TimeGrid = DEFAULT_GRID) -> np.ndarray:
    """Y(t_g) = A(N)^-1 sum_{n <= [N t_g]} X(n) along the last axis of ``path``."""
    if not plan.value > 0:
        raise ValueError("normalization A(N) must be positive")
    N = np.shape(path)[-1]
    return partial_sums_at(path, grid.ends(N)) / plan.value
