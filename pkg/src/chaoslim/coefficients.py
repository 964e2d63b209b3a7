"""Coefficient sequences {a_i} for multilinear polynomial-form filters.

Three families are supported:

* ``RegVar``        a_i = i^(d-1) L(i) with 0 < d < 1/2 and L slowly varying.
* ``Explicit``      a finite list of values.
* ``BoundedDecay``  a finite list of values with a declared envelope
                    |a_i| <= c i^(d-1), d < 1/2.

A ``RegVar`` with ``M=None`` stands for the genuinely infinite sequence.
Finite sums over such a sequence are split into an explicit head and an
analytic tail (``tail_power_sums``), so that quantities like
sum_i a_{n+i} a_i are computed for the infinite sequence rather than for an
arbitrary truncation of it.  Setting ``M`` makes the sequence finite: a_i is
the formula value for i <= M and 0 beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "SlowlyVarying",
    "Constant",
    "LogPower",
    "IteratedLog",
    "RegVar",
    "Explicit",
    "BoundedDecay",
    "CoefficientSpec",
    "geometric",
    "Regime",
    "MemoryRegime",
    "RegimeError",
    "classify_memory",
    "srd_lrd_boundary",
    "build_coefficients",
    "beta_constant",
    "tail_product_sum",
    "power_sums",
    "tail_power_sums",
    "default_head_length",
]


class RegimeError(ValueError):
    """Raised when an operation is applied to a process of the wrong memory regime."""


# ---------------------------------------------------------------------------
# slowly varying functions


@dataclass(frozen=True)
class SlowlyVarying:
    """A slowly varying function L evaluated on x >= 1.

    ``kind`` is one of ``"constant"`` (L = c), ``"logpower"``
    (L = (1 + ln x)^p) or ``"iterlog"`` (L = ln(e + ln x)).
    """

    kind: str = "constant"
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "logpower", "iterlog"):
            raise ValueError(f"unknown slowly varying kind {self.kind!r}")
        if self.kind == "constant" and not self.param > 0:
            raise ValueError("constant slowly varying function needs c > 0")
        if not math.isfinite(self.param):
            raise ValueError("slowly varying parameter must be finite")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.param)
        if self.kind == "logpower":
            return (1.0 + np.log(x)) ** self.param
        return np.log(np.e + np.log(x))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.param}
        if self.kind == "logpower":
            return {"kind": "logpower", "p": self.param}
        return {"kind": "iterlog"}


def Constant(c: float = 1.0) -> SlowlyVarying:
    return SlowlyVarying("constant", float(c))


def LogPower(p: float) -> SlowlyVarying:
    return SlowlyVarying("logpower", float(p))


def IteratedLog() -> SlowlyVarying:
    return SlowlyVarying("iterlog", 0.0)


# ---------------------------------------------------------------------------
# coefficient families


class CoefficientSpec:
    """Common interface of the coefficient families.

    Subclasses provide ``M`` (working length, ``None`` for infinite),
    ``memory_d`` (the exponent d of the decay envelope) and ``at(i)``.
    """

    M: int | None
    family: str

    @property
    def infinite(self) -> bool:
        return self.M is None

    @property
    def memory_d(self) -> float:
        raise NotImplementedError

    def at(self, i) -> np.ndarray:
        """Coefficients a_i at integer indices ``i`` (0 for i <= 0 and i > M)."""
        raise NotImplementedError

    def values(self, M: int | None = None) -> np.ndarray:
        """a_1..a_M as an array; ``M`` defaults to the spec's working length."""
        M = self.M if M is None else M
        if M is None:
            raise ValueError("infinite coefficient sequence needs an explicit length M")
        if M < 1:
            raise ValueError("working length M must be positive")
        return self.at(np.arange(1, M + 1))

    def truncated(self, M: int) -> "CoefficientSpec":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class RegVar(CoefficientSpec):
    """Regularly varying coefficients a_i = i^(d-1) L(i), 0 < d < 1/2."""

    d: float
    L: SlowlyVarying = field(default_factory=Constant)
    M: int | None = None
    family = "regvar"

    def __post_init__(self):
        if not (0.0 < self.d < 0.5):
            raise ValueError(f"RegVar needs d in (0, 1/2), got d={self.d}")
        if self.M is not None and int(self.M) < 1:
            raise ValueError(f"working length M must be positive, got M={self.M}")

    @property
    def memory_d(self) -> float:
        return self.d

    def formula(self, x) -> np.ndarray:
        """The continuous extension x^(d-1) L(x), x >= 1."""
        x = np.asarray(x, dtype=float)
        return x ** (self.d - 1.0) * self.L(x)

    def at(self, i) -> np.ndarray:
        i = np.asarray(i)
        out = np.zeros(i.shape, dtype=float)
        mask = i >= 1
        if self.M is not None:
            mask &= i <= self.M
        out[mask] = self.formula(i[mask])
        return out

    def truncated(self, M: int) -> "RegVar":
        return replace(self, M=int(M))

    def to_dict(self) -> dict:
        out = {"family": "regvar", "d": self.d, "L": self.L.to_dict()}
        if self.M is not None:
            out["M"] = self.M
        return out


@dataclass(frozen=True)
class Explicit(CoefficientSpec):
    """A finite coefficient list a_1..a_M."""

    coefficients: tuple
    M: int | None = None
    family = "explicit"

    def __post_init__(self):
        vals = tuple(float(v) for v in np.ravel(self.coefficients))
        if not vals:
            raise ValueError("explicit coefficient list is empty")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("explicit coefficients must be finite")
        object.__setattr__(self, "coefficients", vals)
        M = len(vals) if self.M is None else int(self.M)
        if M < 1:
            raise ValueError(f"working length M must be positive, got M={M}")
        object.__setattr__(self, "M", M)

    @property
    def memory_d(self) -> float:
        # finitely many nonzero terms: dominated by every power envelope
        return -math.inf

    def at(self, i) -> np.ndarray:
        i = np.asarray(i)
        arr = np.zeros(self.M + 1)
        n = min(self.M, len(self.coefficients))
        arr[1 : n + 1] = self.coefficients[:n]
        out = np.zeros(i.shape, dtype=float)
        mask = (i >= 1) & (i <= self.M)
        out[mask] = arr[i[mask]]
        return out

    def truncated(self, M: int) -> "Explicit":
        return replace(self, M=int(M))

    def to_dict(self) -> dict:
        return {"family": "explicit", "values": list(self.coefficients[: self.M])}


@dataclass(frozen=True)
class BoundedDecay(CoefficientSpec):
    """Finite coefficients obeying a declared envelope |a_i| <= c i^(d-1)."""

    d: float
    coefficients: tuple
    c: float
    M: int | None = None
    family = "bounded"

    def __post_init__(self):
        if not self.d < 0.5:
            raise ValueError(f"BoundedDecay needs d < 1/2, got d={self.d}")
        if not self.c > 0:
            raise ValueError("BoundedDecay bound constant c must be positive")
        vals = np.asarray(np.ravel(self.coefficients), dtype=float)
        if vals.size == 0 or not np.all(np.isfinite(vals)):
            raise ValueError("BoundedDecay coefficients must be a nonempty finite list")
        i = np.arange(1, vals.size + 1, dtype=float)
        envelope = self.c * i ** (self.d - 1.0)
        bad = np.nonzero(np.abs(vals) > envelope * (1 + 1e-12))[0]
        if bad.size:
            j = int(bad[0]) + 1
            raise ValueError(
                f"|a_{j}| = {abs(vals[j - 1]):.6g} exceeds the declared bound "
                f"c*i^(d-1) = {envelope[j - 1]:.6g}"
            )
        object.__setattr__(self, "coefficients", tuple(vals.tolist()))
        M = vals.size if self.M is None else int(self.M)
        if M < 1:
            raise ValueError(f"working length M must be positive, got M={M}")
        object.__setattr__(self, "M", M)

    @property
    def memory_d(self) -> float:
        return self.d

    at = Explicit.at

    def truncated(self, M: int) -> "BoundedDecay":
        return replace(self, M=int(M))

    def to_dict(self) -> dict:
        return {
            "family": "bounded",
            "d": self.d,
            "c": self.c,
            "values": list(self.coefficients[: self.M]),
        }


def geometric(ratio: float, first: float = 1.0, d: float = -1.0, tol: float = 1e-12) -> BoundedDecay:
    """Geometric coefficients a_i = first * ratio^(i-1), truncated where the
    discarded tail of sum a_i^2 falls below ``tol`` (relative)."""
    if not 0 < abs(ratio) < 1:
        raise ValueError("geometric ratio must satisfy 0 < |ratio| < 1")
    M = max(1, math.ceil(math.log(tol) / (2.0 * math.log(abs(ratio)))))
    vals = first * ratio ** np.arange(M)
    i = np.arange(1, M + 1, dtype=float)
    c = float(np.max(np.abs(vals) * i ** (1.0 - d)))
    return BoundedDecay(d=d, coefficients=tuple(vals.tolist()), c=c)


def build_coefficients(spec: CoefficientSpec, M: int | None = None) -> np.ndarray:
    """Evaluate a_1..a_M for ``spec`` (``M`` overrides the spec's working length)."""
    if M is not None and M < 1:
        raise ValueError(f"working length M must be positive, got M={M}")
    return spec.values(M)


# ---------------------------------------------------------------------------
# memory classification


class Regime(str, Enum):
    SRD = "SRD"
    LRD = "LRD"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class MemoryRegime:
    regime: Regime
    d: float
    k: int
    d_X: float | None = None

    @property
    def boundary(self) -> float:
        return srd_lrd_boundary(self.k)

    @property
    def H(self) -> float | None:
        return None if self.d_X is None else self.d_X + 0.5


def srd_lrd_boundary(k: int) -> float:
    return 0.5 * (1.0 - 1.0 / k)


def classify_memory(d: float, k: int) -> MemoryRegime:
    """Classify (d, k) as SRD, LRD or the boundary case between them."""
    if k < 1 or int(k) != k:
        raise ValueError(f"chaos order k must be a positive integer, got {k}")
    k = int(k)
    if d >= 0.5:
        raise ValueError(f"d must be < 1/2, got d={d}")
    b = srd_lrd_boundary(k)
    if math.isfinite(d) and math.isclose(d, b, rel_tol=1e-12, abs_tol=1e-12):
        return MemoryRegime(Regime.BOUNDARY, d, k)
    if d < b:
        return MemoryRegime(Regime.SRD, d, k)
    return MemoryRegime(Regime.LRD, d, k, 0.5 - k * (0.5 - d))


def beta_constant(d: float) -> float:
    """B(d, 1-2d), the limit of n^(1-2d) sum_i a_{n+i} a_i for a_i = i^(d-1)."""
    return math.exp(math.lgamma(d) + math.lgamma(1 - 2 * d) - math.lgamma(1 - d))


# ---------------------------------------------------------------------------
# lagged product sums


def default_head_length(n: int) -> int:
    return max(10**6, 100 * abs(int(n)))


_JACOBI_NODES = 64


@lru_cache(maxsize=64)
def _jacobi_rule(delta: float):
    # Gauss-Jacobi rule for weight v^(delta-1) on (0, 1]
    x, w = special.roots_jacobi(_JACOBI_NODES, 0.0, delta - 1.0)
    v = (1.0 + x) / 2.0
    w = w * 2.0 ** (-delta)
    return v, w


def tail_power_sums(lead: RegVar, lag: RegVar, lags, j: int, start: int) -> np.ndarray:
    """Approximate sum_{i > start} (lead_{h+i} lag_i)^j for every h in ``lags``.

    The sum is replaced by the integral over (start + 1/2, inf) (midpoint
    rule; the error is O(f'(start))), and the integral is evaluated with a
    Gauss-Jacobi rule after the substitution x = (start + 1/2) / v, which
    turns the algebraic decay of the summand into an integrable endpoint
    weight v^(delta-1).
    """
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    alpha = j * (lead.d - 1.0) + j * (lag.d - 1.0)
    delta = -alpha - 1.0
    if delta <= 0:
        raise ValueError("tail sum diverges: need j*(2 - d_lead - d_lag) > 1")
    X0 = start + 0.5
    v, w = _jacobi_rule(round(delta, 14))
    x = X0 / v[None, :]
    h = lags[:, None]
    g = (1.0 + h / x) ** (j * (lead.d - 1.0))
    if not (lead.L.is_constant and lag.L.is_constant):
        g = g * (lead.L(h + x) * lag.L(x)) ** j
    else:
        g = g * (lead.L.param * lag.L.param) ** j
    return X0 ** (alpha + 1.0) * (g @ w)


def power_sums(lead: CoefficientSpec, lag: CoefficientSpec, n: int, kmax: int,
               head: int | None = None) -> np.ndarray:
    """p_j = sum_{i>=1} (lead_{n+i} lag_i)^j for j = 1..kmax, n >= 0.

    Finite sequences give exact finite sums.  When both sequences are
    infinite ``RegVar`` specs the sum is split into an explicit head of
    length ``head`` (default ``max(10^6, 100 n)``) and the analytic tail.
    """
    c, tail_pair = lagged_products(lead, lag, n, head)
    p = np.array([np.sum(c**j) for j in range(1, kmax + 1)])
    if tail_pair is not None:
        start = c.size
        p = p + np.array([tail_power_sums(lead, lag, [n], j, start)[0] for j in range(1, kmax + 1)])
    return p


def lagged_products(lead: CoefficientSpec, lag: CoefficientSpec, n: int, head: int | None = None):
    """Head terms c_i = lead_{n+i} lag_i, and whether an analytic tail is owed.

    Returns ``(c, tail)`` where ``tail`` is ``None`` when the sum is finite.
    """
    n = int(n)
    if n < 0:
        raise ValueError("lag n must be nonnegative; swap the roles of the sequences instead")
    if lag.M is not None and lead.M is not None:
        length = min(lag.M, lead.M - n)
    elif lag.M is not None:
        length = lag.M
    elif lead.M is not None:
        length = lead.M - n
    else:
        length = default_head_length(n) if head is None else int(head)
    if length <= 0:
        return np.zeros(0), None
    i = np.arange(1, length + 1)
    c = lead.at(i + n) * lag.at(i)
    tail = (lead, lag) if (lead.M is None and lag.M is None) else None
    return c, tail


def tail_product_sum(a, b, n: int, head: int | None = None) -> float:
    """sum_{i>=1} a_{n+i} b_i.

    ``a`` and ``b`` are either plain sequences (a_1, a_2, ...) or
    coefficient specs; infinite ``RegVar`` specs include the analytic tail.
    """
    if not isinstance(a, CoefficientSpec):
        a = Explicit(tuple(np.asarray(a, dtype=float)))
    if not isinstance(b, CoefficientSpec):
        b = Explicit(tuple(np.asarray(b, dtype=float)))
    return float(power_sums(a, b, n, 1, head)[0])
