"""Exact second-order structure of discrete-chaos processes.

gamma_{p,q}(n) = Cov(X_p(m), X_q(m + n)) is 0 when the orders differ and
otherwise e_k of c_i = a_i b_{n+i} (a, b the coefficients of X_p, X_q).
The autocovariance is the special case p = q.

Single lags are evaluated with the add-only ESF recurrence.  Tables of many
lags use FFT cross-correlations of a^j and b^j (the power sums of c) and
Newton's identities.  For infinite ``RegVar`` sequences both routes add the
analytic tail of the lagged sums, so the results describe the infinite
sequence; for finite specs they are exact covariances of the finite filter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .coefficients import (
    CoefficientSpec,
    Regime,
    RegimeError,
    beta_constant,
    lagged_products,
    tail_power_sums,
)
from .process import ChaosProcessSpec
from .symfun import esf, esf_from_power_sums, esf_merge

__all__ = [
    "gamma_auto",
    "gamma_cross",
    "gamma_lags",
    "cross_gamma_lags",
    "LongRunSum",
    "long_run_variance",
    "long_run_cross_sum",
    "long_run_sigma",
    "long_run_cross",
    "SRDPositivityError",
    "srd_limit_covariance",
    "exact_partial_sum_variance",
    "exact_partial_sum_covariance",
    "partial_sum_covariance_grid",
    "lstar_constant",
    "CovarianceSummary",
    "summarize",
    "loglog_slope",
]


class SRDPositivityError(RegimeError):
    """The long-run variance of an SRD spec is not strictly positive."""


def _esf_with_tail(c: np.ndarray, k: int, tail_p: np.ndarray | None) -> float:
    e = esf(c, k) if c.size else np.eye(1, k + 1)[0]
    if tail_p is not None:
        e = esf_merge(e, esf_from_power_sums(tail_p, k))
    return float(e[k])


def _lag_esf(lead: CoefficientSpec, lag: CoefficientSpec, n: int, k: int, head: int | None) -> float:
    c, tail = lagged_products(lead, lag, n, head)
    tail_p = None
    if tail is not None:
        tail_p = np.array([tail_power_sums(lead, lag, [n], j, c.size)[0] for j in range(1, k + 1)])
    return _esf_with_tail(c, k, tail_p)


def gamma_cross(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, n: int, head: int | None = None) -> float:
    """Cov(X_p(m), X_q(m + n)); zero whenever the chaos orders differ."""
    if spec_p.k != spec_q.k:
        return 0.0
    n = int(n)
    if n < 0:
        return gamma_cross(spec_q, spec_p, -n, head)
    return _lag_esf(spec_q.coeffs, spec_p.coeffs, n, spec_p.k, head)


def gamma_auto(spec: ChaosProcessSpec, n: int, head: int | None = None) -> float:
    """Autocovariance gamma(n) = gamma(-n)."""
    return gamma_cross(spec, spec, abs(int(n)), head)


# ---------------------------------------------------------------------------
# lag tables


def _default_table_head(max_lag: int) -> int:
    return max(2**20, 16 * max_lag)


def _one_sided_power_sums(lead: CoefficientSpec, lag: CoefficientSpec, max_lag: int, k: int,
                          head: int | None) -> np.ndarray:
    """p_j(n) = sum_i (lead_{n+i} lag_i)^j for n = 0..max_lag; shape (max_lag+1, k)."""
    if lag.M is not None:
        n_lag = lag.M
    elif lead.M is not None:
        n_lag = lead.M
    else:
        n_lag = _default_table_head(max_lag) if head is None else int(head)
    n_lead = n_lag + max_lag if lead.M is None else lead.M
    x = lead.at(np.arange(1, n_lead + 1))
    y = lag.at(np.arange(1, n_lag + 1))
    size = sfft.next_fast_len(n_lead + n_lag, real=True)
    out = np.zeros((max_lag + 1, k))
    for j in range(1, k + 1):
        corr = sfft.irfft(sfft.rfft(x**j, n=size) * np.conj(sfft.rfft(y**j, n=size)), n=size)
        m = min(max_lag + 1, n_lead)
        out[:m, j - 1] = corr[:m]
        if lead.M is None and lag.M is None:
            out[:, j - 1] += tail_power_sums(lead, lag, np.arange(max_lag + 1), j, n_lag)
    return out


def _one_sided_dp(lead: CoefficientSpec, lag: CoefficientSpec, max_lag: int, k: int) -> np.ndarray:
    length = min(lag.M, lead.M)
    i = np.arange(1, length + 1)
    n = np.arange(max_lag + 1)[:, None]
    c = lead.at(i[None, :] + n) * lag.at(i)[None, :]
    return esf(c, k)[:, k]


def _one_sided(lead: CoefficientSpec, lag: CoefficientSpec, max_lag: int, k: int,
               head: int | None, method: str) -> np.ndarray:
    finite = lead.M is not None and lag.M is not None
    if method == "auto":
        method = "dp" if finite and (max_lag + 1) * min(lead.M, lag.M) <= 2 * 10**6 else "fft"
    if method == "dp":
        if not finite:
            raise ValueError("the recurrence route for lag tables needs finite sequences")
        return _one_sided_dp(lead, lag, max_lag, k)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    p = _one_sided_power_sums(lead, lag, max_lag, k, head)
    return esf_from_power_sums(p, k)[:, k]


def cross_gamma_lags(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, max_lag: int,
                     head: int | None = None, method: str = "auto") -> np.ndarray:
    """gamma_{p,q}(n) for n = -max_lag..max_lag (index n + max_lag)."""
    out = np.zeros(2 * max_lag + 1)
    if spec_p.k != spec_q.k:
        return out
    k = spec_p.k
    pos = _one_sided(spec_q.coeffs, spec_p.coeffs, max_lag, k, head, method)
    neg = _one_sided(spec_p.coeffs, spec_q.coeffs, max_lag, k, head, method)
    out[max_lag:] = pos
    out[:max_lag] = neg[:0:-1]
    return out


def gamma_lags(spec: ChaosProcessSpec, max_lag: int, head: int | None = None, method: str = "auto") -> np.ndarray:
    """gamma(n) for n = 0..max_lag."""
    return _one_sided(spec.coeffs, spec.coeffs, max_lag, spec.k, head, method)


# ---------------------------------------------------------------------------
# long-run sums


@dataclass(frozen=True)
class LongRunSum:
    """sum_n gamma(n) with truncation diagnostics.

    ``cutoff`` is the largest |lag| summed explicitly; ``tail_bound`` bounds
    the two-sided remainder via the power envelope (0 for finite filters,
    where the sum is exact); ``converged`` reports tail_bound <= tol*|value|.
    """

    value: float
    cutoff: int
    tail_bound: float
    converged: bool


def _require_srd(*specs: ChaosProcessSpec):
    for s in specs:
        reg = s.regime
        if reg.regime is not Regime.SRD:
            raise RegimeError(f"component {s.label!r} is {reg.regime.value}, not SRD")


def _decay_exponent(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec) -> float:
    # |gamma_{p,q}(n)| <= C n^{k(d_p + d_q - 1)}
    return spec_p.k * (spec_p.coeffs.memory_d + spec_q.coeffs.memory_d - 1.0)


def long_run_cross_sum(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, tol: float = 1e-8,
                       max_cutoff: int = 2**18) -> LongRunSum:
    """sigma_{p,q} = sum over all lags of gamma_{p,q}(n), for SRD components."""
    _require_srd(spec_p, spec_q)
    if spec_p.k != spec_q.k:
        return LongRunSum(0.0, 0, 0.0, True)
    mp, mq = spec_p.coeffs.M, spec_q.coeffs.M
    if mp is not None and mq is not None:
        cut = max(mp, mq)
        lags = cross_gamma_lags(spec_p, spec_q, cut)
        return LongRunSum(float(np.sum(lags)), cut, 0.0, True)
    rho = _decay_exponent(spec_p, spec_q)
    cut = 2**10
    while True:
        lags = cross_gamma_lags(spec_p, spec_q, cut, head=max(2**20, 4 * cut))
        total = float(np.sum(lags))
        n = np.arange(cut // 2, cut + 1)
        side = np.concatenate([lags[cut + cut // 2 :], lags[: cut - cut // 2 + 1][::-1]])
        env = np.abs(side) * np.concatenate([n, n]).astype(float) ** (-rho)
        C = float(np.max(env))
        tail = 2.0 * C * (cut + 0.5) ** (rho + 1.0) / (-(rho + 1.0))
        if tail <= tol * abs(total) or cut >= max_cutoff:
            break
        cut *= 2
    converged = tail <= tol * abs(total)
    if not converged:
        warnings.warn(
            f"long-run sum not converged at cutoff {cut}: envelope tail {tail:.3g}; "
            "adding the integral tail estimate",
            RuntimeWarning,
            stacklevel=2,
        )
        # regularly varying positive tail: the envelope integral is the leading term
        sign = np.sign(lags[-1] + lags[0])
        total += sign * tail
    return LongRunSum(total, cut, tail, converged)


def long_run_variance(spec: ChaosProcessSpec, tol: float = 1e-8) -> LongRunSum:
    """sigma^2 = sum_n gamma(n) for an SRD spec (no positivity check)."""
    return long_run_cross_sum(spec, spec, tol)


def long_run_sigma(spec: ChaosProcessSpec, tol: float = 1e-8) -> float:
    """sigma with sigma^2 = sum_n gamma(n); rejects sigma^2 <= 0."""
    s2 = long_run_variance(spec, tol).value
    gamma0 = gamma_auto(spec, 0)
    if not s2 > 1e-12 * max(gamma0, 1e-300):
        raise SRDPositivityError(
            f"component {spec.label!r}: sum_n gamma(n) = {s2:.6g} is not > 0, "
            "so it is not SRD in the required sense"
        )
    return math.sqrt(s2)


def long_run_cross(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, tol: float = 1e-8) -> float:
    return long_run_cross_sum(spec_p, spec_q, tol).value


def srd_limit_covariance(specs, s: float, t: float) -> np.ndarray:
    """Limit covariance (s ^ t) sigma_pq / (sigma_p sigma_q) of the
    Brownian limits of SRD components."""
    specs = list(specs)
    sig = np.array([long_run_sigma(sp) for sp in specs])
    J = len(specs)
    out = np.empty((J, J))
    for p in range(J):
        for q in range(p, J):
            if p == q:
                val = 1.0
            else:
                val = long_run_cross(specs[p], specs[q]) / (sig[p] * sig[q])
            out[p, q] = out[q, p] = val
    return min(s, t) * out


# ---------------------------------------------------------------------------
# finite-N partial sums


def exact_partial_sum_variance(spec: ChaosProcessSpec, N: int, head: int | None = None) -> float:
    """Var(sum_{n=1}^N X(n)) = sum_{|h|<N} (N - |h|) gamma(h)."""
    if N < 1:
        raise ValueError("N must be positive")
    g = gamma_lags(spec, N - 1, head)
    w = N - np.arange(N, dtype=float)
    return float(g[0] * N + 2.0 * np.dot(w[1:], g[1:]))


def _pair_counts(N1: int, N2: int, max_lag: int) -> np.ndarray:
    # number of (n1, n2) in [1,N1]x[1,N2] with n2 - n1 = h, h = -max_lag..max_lag
    h = np.arange(-max_lag, max_lag + 1)
    return np.maximum(0, np.minimum(N1, N2 - h) - np.maximum(1, 1 - h) + 1).astype(float)


def exact_partial_sum_covariance(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, N1: int, N2: int,
                                 head: int | None = None) -> float:
    """Cov(sum_{n<=N1} X_p(n), sum_{n<=N2} X_q(n))."""
    if spec_p.k != spec_q.k or N1 < 1 or N2 < 1:
        return 0.0
    L = max(N1, N2) - 1
    g = cross_gamma_lags(spec_p, spec_q, L, head)
    return float(np.dot(_pair_counts(N1, N2, L), g))


def partial_sum_covariance_grid(spec_p: ChaosProcessSpec, spec_q: ChaosProcessSpec, ends,
                                head: int | None = None) -> np.ndarray:
    """Matrix of Cov(S_p(N_a), S_q(N_b)) for partial-sum end points ``ends``."""
    ends = [int(e) for e in ends]
    G = len(ends)
    out = np.zeros((G, G))
    if spec_p.k != spec_q.k:
        return out
    L = max(ends) - 1
    g = cross_gamma_lags(spec_p, spec_q, L, head)
    for a in range(G):
        for b in range(G):
            out[a, b] = np.dot(_pair_counts(ends[a], ends[b], L), g)
    return out


# ---------------------------------------------------------------------------
# asymptotic constants and summaries


def lstar_constant(k: int, d: float) -> float:
    """(k!)^-1 B(d, 1-2d)^k: gamma(n) ~ lstar * n^(2 d_X - 1) for a_i = i^(d-1)."""
    return beta_constant(d) ** k / math.factorial(k)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class CovarianceSummary:
    spec: ChaosProcessSpec
    regime: Regime
    d_X: float | None
    sigma_sq: LongRunSum | None
    lstar_constant: float | None

    def gamma(self, n: int) -> float:
        return gamma_auto(self.spec, n)

    @property
    def valid(self) -> bool:
        if self.regime is Regime.SRD:
            return self.sigma_sq is not None and self.sigma_sq.value > 0
        return self.regime is Regime.LRD


def summarize(spec: ChaosProcessSpec) -> CovarianceSummary:
    reg = spec.regime
    sig = long_run_variance(spec) if reg.regime is Regime.SRD else None
    lstar = None
    if reg.regime is Regime.LRD and getattr(spec.coeffs, "L", None) is not None and spec.coeffs.L.is_constant:
        lstar = lstar_constant(spec.k, spec.coeffs.d) * spec.coeffs.L.param ** (2 * spec.k)
    return CovarianceSummary(spec, reg.regime, reg.d_X, sig, lstar)
