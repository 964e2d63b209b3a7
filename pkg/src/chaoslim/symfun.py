"""Elementary symmetric functions.

e_j(c_1, ..., c_M) = sum_{i_1 < ... < i_j} c_{i_1} ... c_{i_j}

Both X(n) (with c_i = a_i eps_{n-i}) and gamma(n) (with c_i = a_{n+i} a_i)
are e_k of some sequence, so this is the combinatorial core of the package.

The primary algorithm is the add-only forward recurrence

    e_j <- e_j + c_i e_{j-1},   j = k, ..., 1,

which never subtracts large alternating terms.  Newton's identities on
power sums are provided separately (``esf_from_power_sums``) because they
allow FFT evaluation over long windows; they are not used where exactness
against the recurrence is required.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "esf",
    "esf_merge",
    "esf_from_power_sums",
    "esf_newton",
    "ESFState",
    "esf_incremental_absorb",
]

# below this length a 1-D input is processed by the plain recurrence
_BLOCK_THRESHOLD = 4096


def _forward_dp(c: np.ndarray, k: int, compensated: bool) -> np.ndarray:
    """Recurrence along the last axis of ``c``; returns (..., k+1)."""
    batch = c.shape[:-1]
    e = np.zeros(batch + (k + 1,), dtype=np.result_type(c, np.float64))
    e[..., 0] = 1.0
    comp = np.zeros_like(e) if compensated else None
    m = c.shape[-1]
    for i in range(m):
        ci = c[..., i]
        for j in range(min(i + 1, k), 0, -1):
            if compensated:
                # Kahan update of e_j += ci * e_{j-1}
                y = ci * e[..., j - 1] - comp[..., j]
                t = e[..., j] + y
                comp[..., j] = (t - e[..., j]) - y
                e[..., j] = t
            else:
                e[..., j] += ci * e[..., j - 1]
    return e


def esf_merge(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """ESF vector of the concatenation of two sequences (degree-k truncated
    product of their generating polynomials)."""
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    k = e1.shape[-1] - 1
    out = np.zeros(np.broadcast_shapes(e1.shape, e2.shape))
    for j in range(k + 1):
        acc = 0.0
        for i in range(j + 1):
            acc = acc + e1[..., i] * e2[..., j - i]
        out[..., j] = acc
    return out


def esf(c, k: int, *, compensated: bool = False) -> np.ndarray:
    """Elementary symmetric values e_0..e_k of ``c`` along its last axis.

    Leading axes are treated as a batch.  Returns zeros for orders larger
    than the number of elements.  Long 1-D inputs are cut into blocks that
    run the recurrence side by side, and the block results are combined
    with ``esf_merge`` (absorbing a whole block at once).
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"order k must be a positive integer, got {k}")
    k = int(k)
    c = np.asarray(c, dtype=float)
    if c.ndim == 0:
        c = c[None]
    if c.ndim > 1 or c.size <= _BLOCK_THRESHOLD or compensated:
        return _forward_dp(c, k, compensated)
    m = c.size
    width = int(np.ceil(np.sqrt(m)))
    nblocks = -(-m // width)
    padded = np.zeros(nblocks * width)
    padded[:m] = c
    blocks = _forward_dp(padded.reshape(nblocks, width), k, False)
    # pairwise tree reduction, keeping block order
    while blocks.shape[0] > 1:
        if blocks.shape[0] % 2:
            unit = np.zeros((1, k + 1))
            unit[0, 0] = 1.0
            blocks = np.concatenate([blocks, unit])
        blocks = esf_merge(blocks[0::2], blocks[1::2])
    return blocks[0]


def esf_from_power_sums(p: np.ndarray, k: int) -> np.ndarray:
    """e_0..e_k from power sums p_1..p_k (last axis) by Newton's identities.

    j e_j = sum_{i=1}^{j} (-1)^(i-1) e_{j-i} p_i
    """
    p = np.asarray(p, dtype=float)
    if p.shape[-1] < k:
        raise ValueError("need power sums p_1..p_k")
    e = np.zeros(p.shape[:-1] + (k + 1,))
    e[..., 0] = 1.0
    for j in range(1, k + 1):
        acc = np.zeros(p.shape[:-1])
        for i in range(1, j + 1):
            term = e[..., j - i] * p[..., i - 1]
            acc = acc + term if i % 2 else acc - term
        e[..., j] = acc / j
    return e


def esf_newton(c, k: int) -> np.ndarray:
    """e_0..e_k via power sums and Newton's identities (not add-only)."""
    c = np.asarray(c, dtype=float)
    p = np.stack([np.sum(c**j, axis=-1) for j in range(1, k + 1)], axis=-1)
    return esf_from_power_sums(p, k)


@dataclass(frozen=True)
class ESFState:
    """Running e_0..e_k after absorbing ``count`` elements."""

    e: tuple
    count: int = 0

    @classmethod
    def empty(cls, k: int) -> "ESFState":
        if k < 1:
            raise ValueError("order k must be positive")
        return cls(e=(1.0,) + (0.0,) * k, count=0)

    @property
    def k(self) -> int:
        return len(self.e) - 1

    def absorb(self, c_new: float) -> "ESFState":
        return esf_incremental_absorb(self, c_new)

    def as_array(self) -> np.ndarray:
        return np.array(self.e)


def esf_incremental_absorb(state: ESFState, c_new: float) -> ESFState:
    """Return the state obtained by appending ``c_new`` to the absorbed sequence."""
    e = list(state.e)
    c_new = float(c_new)
    for j in range(len(e) - 1, 0, -1):
        e[j] = e[j] + c_new * e[j - 1]
    return ESFState(e=tuple(e), count=state.count + 1)
