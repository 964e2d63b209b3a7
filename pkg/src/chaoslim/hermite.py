"""Hermite processes Z_d^(k) and their discrete-chaos approximants.

Z(t) = int' f_t(x_1, ..., x_k) dB(x_1) ... dB(x_k) with kernel

    f_t(x) = a_{k,d} int_0^t prod_j (s - x_j)_+^(d-1) ds,

H = 1 + k(d - 1/2) and a_{k,d} chosen so that Var Z(1) = 1.  Simulation
goes through the normalized partial sums of the order-k chaos process with
coefficients a_i = i^(d-1), which converge to Z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .coefficients import RegVar, srd_lrd_boundary
from .covariance import gamma_lags
from .noise import NoiseSpec, SeedPolicy
from .partial_sums import DEFAULT_GRID, TimeGrid, exact_variance_plan, partial_sum_process
from .process import (
    ChaosProcessSpec,
    DiscreteKernel,
    effective_spec,
    partial_sum_kernel,
    simulate_vector,
)

__all__ = [
    "HermiteSpec",
    "HermiteQuadratureError",
    "a_kd",
    "hermite_kernel",
    "simulate_hermite",
    "hermite_theoretical_variance",
    "hermite_covariance",
    "approximant_kernel",
    "exact_variance_ratios",
]

DEFAULT_HERMITE_N = 2**16


class HermiteQuadratureError(RuntimeError):
    """The kernel integral did not converge."""


def _check_range(k: int, d: float):
    if int(k) != k or k < 1:
        raise ValueError(f"order k must be a positive integer, got {k}")
    lo = srd_lrd_boundary(int(k))
    if not (lo < d < 0.5):
        raise ValueError(f"d={d} outside the long-memory range ({lo:.6g}, 0.5) for k={k}")


def a_kd(k: int, d: float) -> float:
    """Normalizing constant of the Hermite kernel, via log-gamma."""
    _check_range(k, d)
    H = k * (d - 0.5) + 1.0
    log_r = (
        math.log(H) + math.log(2.0 * H - 1.0)
        + k * math.lgamma(1.0 - d)
        - math.lgamma(k + 1.0) - k * math.lgamma(d) - k * math.lgamma(1.0 - 2.0 * d)
    )
    return math.exp(0.5 * log_r)


@dataclass(frozen=True)
class HermiteSpec:
    k: int
    d: float

    def __post_init__(self):
        _check_range(self.k, self.d)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "d", float(self.d))

    @property
    def H(self) -> float:
        return 1.0 + self.k * (self.d - 0.5)

    @property
    def a_kd(self) -> float:
        return a_kd(self.k, self.d)

    def process_spec(self, label: str = "Z") -> ChaosProcessSpec:
        """The chaos process whose normalized partial sums approximate Z."""
        return ChaosProcessSpec(RegVar(self.d), self.k, label)


def hermite_kernel(spec: HermiteSpec, t: float, x) -> float:
    """f_t(x) by one-dimensional quadrature.

    With m the largest x_j, the substitution u = (s - m)^d removes the
    endpoint singularity of (s - m)^(d-1).  On a diagonal where two or more
    coordinates share the maximum (below t) the integral diverges and +inf
    is returned.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != spec.k:
        raise ValueError(f"kernel of order {spec.k} needs {spec.k} arguments")
    d = spec.d
    m = float(x.max())
    lo = max(m, 0.0)
    if lo >= t:
        return 0.0
    if m >= 0.0 and np.count_nonzero(x == m) > 1:
        return math.inf
    i_max = int(np.argmax(x))
    rest = np.delete(x, i_max)

    def integrand(u):
        s = m + u ** (1.0 / d)
        return np.prod((s - rest) ** (d - 1.0)) if rest.size else 1.0

    u_lo, u_hi = (lo - m) ** d, (t - m) ** d
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(integrand, u_lo, u_hi, epsabs=0.0, epsrel=1e-11, limit=400)
        except integrate.IntegrationWarning as exc:
            raise HermiteQuadratureError(f"kernel quadrature failed at x={x.tolist()}, t={t}: {exc}") from exc
    return spec.a_kd * val / d


def hermite_theoretical_variance(spec: HermiteSpec, t: float) -> float:
    """Var Z(t) = t^(2H)."""
    return float(t) ** (2.0 * spec.H)


def hermite_covariance(spec: HermiteSpec, s: float, t: float) -> float:
    """Cov(Z(s), Z(t)) = (s^2H + t^2H - |t - s|^2H) / 2."""
    h2 = 2.0 * spec.H
    return 0.5 * (abs(s) ** h2 + abs(t) ** h2 - abs(t - s) ** h2)


def simulate_hermite(spec: HermiteSpec, N: int = DEFAULT_HERMITE_N, grid: TimeGrid = DEFAULT_GRID,
                     noise: NoiseSpec = NoiseSpec(), policy: SeedPolicy = SeedPolicy(0), R: int = 1,
                     first_replication: int = 0, history: str = "aggregated",
                     batch: int = 256) -> np.ndarray:
    """Approximate Z(t_g) in R replications, shape (R, G).

    The chaos process is simulated and normalized by the exact partial-sum
    standard deviation, so Var of the result at t = 1 is 1 for every N.
    """
    proc = spec.process_spec()
    plan = exact_variance_plan(effective_spec(proc, N, history), N)
    out = np.empty((R, len(grid)))
    for lo in range(0, R, batch):
        n = min(batch, R - lo)
        paths = simulate_vector([proc], noise, policy, N, n, first_replication=first_replication + lo,
                                history=history)
        out[lo : lo + n] = partial_sum_process(paths.values[:, 0, :], plan, grid)
    return out


def approximant_kernel(spec: HermiteSpec, N: int, t: float, M: int) -> DiscreteKernel:
    """Kernel of the normalized partial sum up to [Nt] as a discrete
    multiple integral, with the coefficient sequence cut at M."""
    proc = spec.process_spec()
    plan = exact_variance_plan(proc.with_coeffs(proc.coeffs.truncated(M)), N)
    return partial_sum_kernel(proc, 1, int(math.floor(N * t + 1e-9)), scale=1.0 / plan.value, M=M)


def exact_variance_ratios(spec: HermiteSpec, N: int, grid: TimeGrid = DEFAULT_GRID) -> np.ndarray:
    """Var(S_[Nt]) / Var(S_N) for each grid time (tends to t^2H)."""
    proc = spec.process_spec()
    g = gamma_lags(proc, N - 1)

    def var(n):
        if n == 0:
            return 0.0
        w = n - np.arange(n, dtype=float)
        return float(g[0] * n + 2.0 * np.dot(w[1:], g[1:n]))
    total = var(N)
    return np.array([var(int(e)) / total for e in grid.ends(N)])
