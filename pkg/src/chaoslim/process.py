"""Sample paths of multilinear polynomial-form (discrete-chaos) processes.

    X(n) = sum_{1 <= i_1 < ... < i_k} a_{i_1} ... a_{i_k} eps_{n-i_1} ... eps_{n-i_k}

For each time n, X(n) = e_k(w_1, ..., w_M) with w_i = a_i eps_{n-i}.  Two
evaluation routes are available:

``"dp"``   the add-only ESF recurrence over the window, vectorized across
           time and replications (O(N M k)); exact up to roundoff.
``"fft"``  power sums P_j(n) = sum_i a_i^j eps_{n-i}^j as FFT convolutions,
           then Newton's identities (O(k (N+M) log(N+M))).  Used for long
           windows where the recurrence is out of budget.

``"auto"`` picks the recurrence for windows of at most ``DP_MAX_WINDOW``
coefficients.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .coefficients import CoefficientSpec, MemoryRegime, classify_memory
from .noise import NoiseSpec, NoiseWindow, SeedPolicy, noise_window
from .symfun import esf_from_power_sums, esf_merge

__all__ = [
    "ChaosProcessSpec",
    "PathMatrix",
    "DiscreteKernel",
    "DP_MAX_WINDOW",
    "simulation_length",
    "simulated_spec",
    "simulate_path",
    "simulate_truncated_path",
    "simulate_vector",
    "evaluate_polynomial_form",
    "partial_sum_kernel",
    "SharedNoise",
    "HistoryBlocks",
    "HistorySample",
    "sample_history",
    "history_power_sums",
    "effective_spec",
    "HISTORY_MODES",
]

DP_MAX_WINDOW = 64
DEFAULT_SUPPORT_CAP = 10**7


@dataclass(frozen=True)
class ChaosProcessSpec:
    """One component X_j: coefficients plus chaos order k."""

    coeffs: CoefficientSpec
    k: int
    label: str = "X"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"chaos order k must be a positive integer, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def regime(self) -> MemoryRegime:
        return classify_memory(self.coeffs.memory_d, self.k)

    def with_coeffs(self, coeffs: CoefficientSpec) -> "ChaosProcessSpec":
        return ChaosProcessSpec(coeffs, self.k, self.label)

    def to_dict(self) -> dict:
        return {"label": self.label, "k": self.k, "coefficients": self.coeffs.to_dict()}


def simulation_length(spec: ChaosProcessSpec, N: int) -> int:
    """Window length M used when simulating N steps (N for infinite sequences)."""
    return spec.coeffs.M if spec.coeffs.M is not None else int(N)


def simulated_spec(spec: ChaosProcessSpec, N: int) -> ChaosProcessSpec:
    """The finite spec actually simulated for a path of length N."""
    if spec.coeffs.M is not None:
        return spec
    return spec.with_coeffs(spec.coeffs.truncated(int(N)))


def _dp_path(a: np.ndarray, k: int, eps: np.ndarray, N: int, full: bool = False) -> np.ndarray:
    # eps[..., p] holds eps_{p+1-M}; w_i(n) = a_i eps_{n-i} sits at offset M-i
    M = a.size
    e = [np.ones(eps.shape[:-1] + (N,))] + [np.zeros(eps.shape[:-1] + (N,)) for _ in range(k)]
    for i in range(1, M + 1):
        if a[i - 1] == 0.0:
            continue
        w = a[i - 1] * eps[..., M - i : M - i + N]
        for j in range(min(i, k), 0, -1):
            e[j] += w * e[j - 1]
    return np.stack(e, axis=-1) if full else e[k]


# ---------------------------------------------------------------------------
# aggregated distant past

HISTORY_ETA = 1.0 / 32.0
HISTORY_HORIZON = 2.0**60
EXACT_BLOCK_MAX = 256
CHEBYSHEV_NODES = 48


@dataclass(frozen=True)
class HistoryBlocks:
    """Partition of the distant past s <= -M into consecutive blocks.

    A block at distance D from time 1 has width about ``eta * D``, out to
    ``horizon * N``.  Inside a block the coefficient a_{n-s} is replaced by
    its value at the block centre, so the block enters X(n) only through
    the power sums T_j = sum_{s in block} eps_s^j.
    """

    N: int
    M: int
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def build(cls, N: int, M: int, eta: float = HISTORY_ETA, horizon: float = HISTORY_HORIZON) -> "HistoryBlocks":
        lo, hi = [], []
        top = -float(M)
        while 1.0 - top <= horizon * N:
            width = max(1.0, math.floor(eta * (1.0 - top)))
            lo.append(top - width + 1.0)
            hi.append(top)
            top -= width
        return cls(int(N), int(M), np.array(lo), np.array(hi))

    @property
    def count(self) -> int:
        return self.lo.size

    @property
    def sizes(self) -> np.ndarray:
        return self.hi - self.lo + 1.0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)


def _psd_sqrt(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def sample_history(blocks: HistoryBlocks, noise_spec: NoiseSpec, policy: SeedPolicy, replications,
                   k: int) -> np.ndarray:
    """Block power sums T[r, b, j-1] = sum_{s in block b} eps_s^j, j = 1..k.

    Blocks of at most ``EXACT_BLOCK_MAX`` innovations are drawn exactly;
    larger ones use the joint normal approximation with the exact mean
    m E eps^j and covariance m (E eps^(i+j) - E eps^i E eps^j).
    """
    sizes = blocks.sizes
    small = sizes <= EXACT_BLOCK_MAX
    mu = np.array([noise_spec.moment(j) for j in range(2 * k + 1)])
    cov = np.array([[mu[i + j] - mu[i] * mu[j] for j in range(1, k + 1)] for i in range(1, k + 1)])
    root = _psd_sqrt(cov)
    small_sizes = sizes[small].astype(np.int64)
    cuts = np.concatenate([[0], np.cumsum(small_sizes)[:-1]])
    big = sizes[~small]
    out = np.empty((len(replications), blocks.count, k))
    for row, r in enumerate(replications):
        g = policy.history_generator(r)
        if small_sizes.size:
            eps = noise_spec.draw(g, int(small_sizes.sum()))
            for j in range(1, k + 1):
                out[row, small, j - 1] = np.add.reduceat(eps**j, cuts)
        z = g.standard_normal((big.size, k))
        out[row, ~small] = big[:, None] * mu[1 : k + 1] + np.sqrt(big)[:, None] * (z @ root.T)
    return out


def _interpolation_matrix(N: int, nodes: int = CHEBYSHEV_NODES):
    """Time points and barycentric weights mapping values at Chebyshev
    points of [1, N] onto n = 1..N."""
    n = np.arange(1, N + 1, dtype=float)
    if N <= nodes:
        return n, np.eye(N)
    q = np.arange(nodes)
    x = np.cos(np.pi * q / (nodes - 1))
    t = 1.0 + (N - 1) * (x + 1.0) / 2.0
    w = (-1.0) ** q
    w[0] *= 0.5
    w[-1] *= 0.5
    diff = n[:, None] - t[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    frac = w / diff
    mat = frac / frac.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    mat[hit] = exact[hit].astype(float)
    return t, mat


def history_power_sums(coeffs: CoefficientSpec, blocks: HistoryBlocks, T: np.ndarray, k: int) -> np.ndarray:
    """Contribution of the aggregated past to P_j(n), shape (R, N, k)."""
    nodes, interp = _interpolation_matrix(blocks.N)
    lag = nodes[:, None] - blocks.centers[None, :]
    base = coeffs.formula(lag)
    out = np.empty((T.shape[0], blocks.N, k))
    for j in range(1, k + 1):
        at_nodes = T[:, :, j - 1] @ (base**j).T
        out[:, :, j - 1] = at_nodes @ interp.T
    return out


@dataclass
class HistorySample:
    """Sampled block power sums shared by all components of a batch."""

    blocks: HistoryBlocks
    T: np.ndarray


class SharedNoise:
    """One noise window reused by several filters, with cached spectra of eps^j.

    The window holds eps_{1-M_max} .. eps_{N-1}.  Filters longer than M_max
    (infinite sequences with an aggregated past) read zeros before the
    window start and take that part from a ``HistorySample`` instead.
    """

    def __init__(self, eps: np.ndarray, N: int, M_max: int, workers: int | None = None,
                 max_filter: int | None = None):
        if eps.shape[-1] != N + M_max - 1:
            raise ValueError("shared noise window must cover 1-M_max .. N-1")
        self.eps = eps
        self.N = int(N)
        self.M_max = int(M_max)
        longest = max(self.M_max, max_filter or 0)
        self.size = sfft.next_fast_len(N + M_max + longest, real=True)
        self.workers = workers
        self._spectra: dict[int, np.ndarray] = {}

    def spectrum(self, j: int) -> np.ndarray:
        if j not in self._spectra:
            self._spectra[j] = sfft.rfft(self.eps**j, n=self.size, axis=-1, workers=self.workers)
        return self._spectra[j]

    def _power_sums(self, a: np.ndarray, k: int) -> np.ndarray:
        g = np.zeros(a.size + 1)
        g[1:] = a
        p = []
        for j in range(1, k + 1):
            conv = sfft.irfft(
                self.spectrum(j) * sfft.rfft(g**j, n=self.size), n=self.size, axis=-1, workers=self.workers
            )
            p.append(conv[..., self.M_max : self.M_max + self.N])
        return np.stack(p, axis=-1)

    def path(self, a: np.ndarray, k: int, method: str = "auto", history: np.ndarray | None = None) -> np.ndarray:
        """X(1..N) for coefficients ``a``; ``history`` adds far-past power sums (R, N, k)."""
        M = a.size
        if M > self.N + self.M_max - 1:
            raise ValueError("coefficient window longer than the shared noise window allows")
        if M > self.M_max and history is None:
            raise ValueError("coefficient window longer than the shared noise window")
        if method == "auto":
            method = "dp" if M <= DP_MAX_WINDOW else "fft"
        if method == "dp":
            if M <= self.M_max:
                eps = self.eps[..., self.M_max - M :]
            else:
                pad = np.zeros(self.eps.shape[:-1] + (M - self.M_max,))
                eps = np.concatenate([pad, self.eps], axis=-1)
            if history is None:
                return _dp_path(a, k, eps, self.N)
            e = _dp_path(a, k, eps, self.N, full=True)
            return esf_merge(e, esf_from_power_sums(history, k))[..., k]
        if method != "fft":
            raise ValueError(f"unknown simulation method {method!r}")
        p = self._power_sums(a, k)
        if history is not None:
            p = p + history
        return esf_from_power_sums(p, k)[..., k]


def simulate_path(spec: ChaosProcessSpec, noise: NoiseWindow, N: int, method: str = "auto") -> np.ndarray:
    """X(1..N) driven by ``noise`` (shape (N,) or (R, N) for batched windows).

    Infinite sequences are cut at M = N here; ``simulate_vector`` offers
    the aggregated distant past instead.
    """
    if N < 1:
        raise ValueError("path length N must be positive")
    M = simulation_length(spec, N)
    a = spec.coeffs.values(M)
    if not noise.covers(1 - M, N - 1):
        raise ValueError(
            f"insufficient noise window: need eps_{1 - M}..eps_{N - 1}, "
            f"have eps_{noise.start}..eps_{noise.stop}"
        )
    shared = SharedNoise(noise.take(1 - M, N - 1), N, M)
    return shared.path(a, spec.k, method)


def simulate_truncated_path(spec: ChaosProcessSpec, m: int, noise: NoiseWindow, N: int,
                            method: str = "auto") -> np.ndarray:
    """Path of the m-truncated process (coefficients a_i, i > m, set to 0).

    The result is m-dependent.
    """
    if m <= spec.k:
        raise ValueError(f"truncation m={m} must exceed the chaos order k={spec.k}")
    M = simulation_length(spec, N)
    trunc = spec.with_coeffs(spec.coeffs.truncated(min(int(m), M)))
    return simulate_path(trunc, noise, N, method)


@dataclass
class PathMatrix:
    """Simulated paths, ``values[r, j, n-1] = X_j(n)`` in replication r."""

    values: np.ndarray
    labels: tuple = ()
    seed: int | None = None
    replications: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError("PathMatrix values must be indexed (r, j, n)")
        if not self.labels:
            self.labels = tuple(f"X{j + 1}" for j in range(self.J))
        if not self.replications:
            self.replications = tuple(range(self.R))

    @property
    def R(self) -> int:
        return self.values.shape[0]

    @property
    def J(self) -> int:
        return self.values.shape[1]

    @property
    def N(self) -> int:
        return self.values.shape[2]


HISTORY_MODES = ("aggregated", "truncated")


def effective_spec(spec: ChaosProcessSpec, N: int, history: str = "aggregated") -> ChaosProcessSpec:
    """The spec whose exact covariances describe the simulated paths.

    With an aggregated past an infinite sequence stays infinite; with
    plain truncation it is cut at M = N.
    """
    if history not in HISTORY_MODES:
        raise ValueError(f"history must be one of {HISTORY_MODES}, got {history!r}")
    return spec if history == "aggregated" else simulated_spec(spec, N)


def simulate_vector(specs, noise_spec: NoiseSpec, policy: SeedPolicy, N: int, R: int,
                    method: str = "auto", first_replication: int = 0,
                    history: str = "aggregated") -> PathMatrix:
    """Simulate J components on one shared noise window per replication.

    The exact window is eps_{1-M_max} .. eps_{N-1} with M_max the longest
    working length (N for infinite sequences).  Under ``history="aggregated"``
    infinite sequences also see every earlier innovation, through the
    blocks of ``HistoryBlocks``; the same block sums feed every component.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one process spec")
    if history not in HISTORY_MODES:
        raise ValueError(f"history must be one of {HISTORY_MODES}, got {history!r}")
    if N < 1 or R < 1:
        raise ValueError("N and R must be positive")
    M_max = max(simulation_length(s, N) for s in specs)
    reps = list(range(first_replication, first_replication + R))
    win = noise_window(noise_spec, policy, reps, 1 - M_max, N - 1)
    far = [s for s in specs if s.coeffs.infinite] if history == "aggregated" else []
    sample = None
    if far:
        blocks = HistoryBlocks.build(N, M_max)
        sample = HistorySample(blocks, sample_history(blocks, noise_spec, policy, reps, max(s.k for s in far)))
    shared = SharedNoise(win.values, N, M_max, max_filter=N + M_max - 1 if far else None)
    out = np.empty((R, len(specs), N))
    for j, s in enumerate(specs):
        if sample is not None and s.coeffs.infinite:
            a = s.coeffs.values(N + M_max - 1)
            hist = history_power_sums(s.coeffs, sample.blocks, sample.T[:, :, : s.k], s.k)
            out[:, j, :] = shared.path(a, s.k, method, history=hist)
        else:
            a = s.coeffs.values(simulation_length(s, N))
            out[:, j, :] = shared.path(a, s.k, method)
    return PathMatrix(
        out,
        labels=tuple(s.label for s in specs),
        seed=policy.master_seed,
        replications=tuple(reps),
        meta={"noise": noise_spec.distribution.value, "history": history,
              "specs": [s.to_dict() for s in specs]},
    )


# ---------------------------------------------------------------------------
# discrete multiple integrals


@dataclass
class DiscreteKernel:
    """Kernel h on Z^k with finite support, listed as (index tuple, value) rows.

    h is used as given over ordered tuples: a row (i_1, ..., i_k) contributes
    h(i_1, ..., i_k) eps_{i_1} ... eps_{i_k} and no symmetrization is done.
    Rows on a diagonal (i_p = i_q for p != q) are rejected.
    """

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.atleast_2d(np.asarray(self.indices, dtype=np.int64))
        self.values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if self.indices.shape[0] != self.values.shape[0]:
            raise ValueError("kernel needs one value per index tuple")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("kernel values must be finite")
        srt = np.sort(self.indices, axis=1)
        on_diag = np.any(srt[:, 1:] == srt[:, :-1], axis=1)
        if np.any(on_diag & (self.values != 0)):
            raise ValueError("kernel must vanish on the diagonals i_p = i_q")
        keep = ~on_diag
        self.indices = self.indices[keep]
        self.values = self.values[keep]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def span(self) -> tuple[int, int]:
        if self.size == 0:
            return (0, 0)
        return int(self.indices.min()), int(self.indices.max())

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.values)))

    def second_moment(self) -> float:
        """E Q_k(h)^2 for unit-variance noise: sum over index sets of the
        squared sum of h over the orderings of that set."""
        if self.size == 0:
            return 0.0
        keys = np.sort(self.indices, axis=1)
        _, inverse = np.unique(keys, axis=0, return_inverse=True)
        grouped = np.bincount(inverse.ravel(), weights=self.values)
        return float(np.sum(grouped**2))

    @classmethod
    def point(cls, index, value: float = 1.0) -> "DiscreteKernel":
        return cls(np.asarray([index]), np.asarray([value]))

    @classmethod
    def from_function(cls, rule, lo: int, hi: int, k: int, ordered: bool = True,
                      width: int | None = None, cap: int = DEFAULT_SUPPORT_CAP) -> "DiscreteKernel":
        """Evaluate ``rule(i_1, ..., i_k)`` on the box [lo, hi]^k.

        ``ordered`` restricts to i_1 < ... < i_k; ``width`` keeps only tuples
        with max - min < width (banded support).
        """
        n = hi - lo + 1
        count = math.comb(n, k) if ordered else math.perm(n, k)
        if count > cap:
            raise ValueError(f"kernel support of {count} tuples exceeds the cap {cap}")
        gen = itertools.combinations(range(lo, hi + 1), k) if ordered else \
            itertools.permutations(range(lo, hi + 1), k)
        idx = np.array(list(gen), dtype=np.int64).reshape(-1, k)
        if width is not None:
            idx = idx[idx.max(axis=1) - idx.min(axis=1) < width]
        vals = np.array([rule(*row) for row in idx], dtype=float)
        return cls(idx, vals)


def evaluate_polynomial_form(h: DiscreteKernel, noise: NoiseWindow, k: int | None = None,
                             cap: int = DEFAULT_SUPPORT_CAP) -> np.ndarray | float:
    """Q_k(h) = sum over the listed tuples of h(i) eps_{i_1} ... eps_{i_k}."""
    if k is not None and k != h.k:
        raise ValueError(f"kernel order {h.k} does not match k={k}")
    if h.size > cap:
        raise ValueError(f"kernel support of {h.size} tuples exceeds the cap {cap}")
    batch = noise.values.shape[:-1]
    if h.size == 0:
        return np.zeros(batch) if batch else 0.0
    lo, hi = h.span
    if not noise.covers(lo, hi):
        raise ValueError(f"noise window does not cover kernel support [{lo}, {hi}]")
    eps = noise.values
    out = np.zeros(batch)
    chunk = max(1, 2**22 // max(1, int(np.prod(batch, dtype=np.int64)) * h.k))
    for s in range(0, h.size, chunk):
        idx = h.indices[s : s + chunk] - noise.start
        prod = np.prod(eps[..., idx], axis=-1)
        out = out + prod @ h.values[s : s + chunk]
    return out if batch else float(out)


def partial_sum_kernel(spec: ChaosProcessSpec, n_lo: int, n_hi: int, scale: float = 1.0,
                       M: int | None = None, cap: int = DEFAULT_SUPPORT_CAP) -> DiscreteKernel:
    """Kernel of scale * sum_{n=n_lo}^{n_hi} X(n) as a polynomial form in eps.

    h(s_1, ..., s_k) = scale * sum_n prod_j a_{n - s_j} on s_1 < ... < s_k.
    """
    M = spec.coeffs.M if M is None else M
    if M is None:
        raise ValueError("infinite coefficient sequence needs a working length M")
    lo, hi = n_lo - M, n_hi - 1
    count = math.comb(hi - lo + 1, spec.k)
    if count > cap:
        raise ValueError(f"kernel support of {count} tuples exceeds the cap {cap}")
    idx = np.array(list(itertools.combinations(range(lo, hi + 1), spec.k)), dtype=np.int64)
    idx = idx.reshape(-1, spec.k)
    n = np.arange(n_lo, n_hi + 1)
    lagged = n[None, :, None] - idx[:, None, :]
    vals = scale * np.sum(np.prod(spec.coeffs.truncated(M).at(lagged), axis=-1), axis=-1)
    keep = vals != 0
    return DiscreteKernel(idx[keep], vals[keep])
