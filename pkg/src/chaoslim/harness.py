"""Monte Carlo experiments for the multivariate limit theorems.

Components are declared in blocks: ``S1`` (SRD, order 1), ``S2`` (SRD,
order >= 2) and ``L`` (LRD).  An experiment simulates R replications of
all components on shared noise, normalizes each partial sum by its exact
standard deviation, and compares the empirical covariance of
{Y_j(t_g)} with

* (s ^ t) sigma_pq / (sigma_p sigma_q) for SRD pairs of equal order,
* 0 for pairs of different order and for S2 against L,
* (s^2H + t^2H - |t - s|^2H) / 2 for an LRD component with itself.

S1 against L, and distinct LRD components, have no closed-form limit here
and are reported without a verdict.  Every entry also carries the exact
finite-N covariance, which isolates Monte Carlo error from the
approximation error of the limit.

Standard errors come from the replication-level jackknife.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coefficients import Explicit, Regime, RegimeError
from .covariance import long_run_cross, long_run_sigma, partial_sum_covariance_grid
from .hermite import hermite_covariance, HermiteSpec
from .noise import NoiseSpec, SeedPolicy, noise_window
from .partial_sums import DEFAULT_GRID, TimeGrid, exact_variance_plan, partial_sums_at
from .process import (
    ChaosProcessSpec,
    DiscreteKernel,
    HISTORY_MODES,
    effective_spec,
    evaluate_polynomial_form,
    simulate_vector,
)

__all__ = [
    "BLOCKS",
    "BlockError",
    "block_of",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "simulate_levels",
    "brownian_functional_check",
    "gaussianity_check",
    "hypercontractivity_check",
    "HypercontractivityReport",
    "jackknife_se",
    "jackknife_cov",
    "jackknife_corr",
    "write_report",
    "write_csv",
]

BLOCKS = ("S1", "S2", "L")
ROUNDING_TOL = 1e-12


class BlockError(ValueError):
    """A declared block does not match the component's regime and order."""


def block_of(spec: ChaosProcessSpec) -> str:
    reg = spec.regime
    if reg.regime is Regime.BOUNDARY:
        raise RegimeError(f"component {spec.label!r} sits on the SRD/LRD boundary")
    if reg.regime is Regime.LRD:
        return "L"
    return "S1" if spec.k == 1 else "S2"


# ---------------------------------------------------------------------------
# jackknife


def jackknife_se(loo: np.ndarray) -> np.ndarray:
    """Jackknife standard error from leave-one-out estimates along axis 0."""
    R = loo.shape[0]
    dev = loo - loo.mean(axis=0)
    return np.sqrt((R - 1) / R * np.sum(dev**2, axis=0))


def _loo_cov(X: np.ndarray) -> np.ndarray:
    R = X.shape[0]
    S = X.sum(axis=0)
    Sxy = X.T @ X
    n = R - 1
    Si = S[None, :] - X
    return (Sxy[None] - X[:, :, None] * X[:, None, :] - Si[:, :, None] * Si[:, None, :] / n) / (n - 1)


def jackknife_cov(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance of the columns of X (R, P) and its jackknife se."""
    X = np.asarray(X, dtype=float)
    R = X.shape[0]
    if R < 3:
        raise ValueError("need at least 3 replications")
    cov = np.cov(X, rowvar=False, ddof=1).reshape(X.shape[1], X.shape[1])
    return cov, jackknife_se(_loo_cov(X))


def _loo_corr(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    R = x.size
    n = R - 1
    sx, sy = x.sum() - x, y.sum() - y
    sxx, syy, sxy = (x * x).sum() - x * x, (y * y).sum() - y * y, (x * y).sum() - x * y
    cxy = sxy - sx * sy / n
    cxx = sxx - sx * sx / n
    cyy = syy - sy * sy / n
    return cxy / np.sqrt(cxx * cyy)


def jackknife_corr(x, y) -> tuple[float, float]:
    """Pearson correlation and its jackknife se."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least 3 replications")
    r = float(np.corrcoef(x, y)[0, 1])
    return r, float(jackknife_se(_loo_corr(x, y)))


# ---------------------------------------------------------------------------
# configuration


def _default_batch(N: int) -> int:
    return max(1, min(512, 2**22 // max(1, N)))


@dataclass
class ExperimentConfig:
    """Components with declared blocks plus the Monte Carlo design."""

    specs: list
    blocks: list
    N: int = 2**14
    R: int = 2000
    grid: TimeGrid = DEFAULT_GRID
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    tolerance_se: float = 4.0
    history: str = "aggregated"
    threads: int = 1
    batch: int | None = None

    def validate(self) -> "ExperimentConfig":
        if not self.specs:
            raise ValueError("experiment needs at least one component")
        if len(self.blocks) != len(self.specs):
            raise BlockError("one block declaration is needed per component")
        labels = [s.label for s in self.specs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"component labels must be unique, got {labels}")
        for spec, declared in zip(self.specs, self.blocks):
            if declared not in BLOCKS:
                raise BlockError(f"unknown block {declared!r} for {spec.label!r}; use one of {BLOCKS}")
            actual = block_of(spec)
            if actual != declared:
                reg = spec.regime
                raise BlockError(
                    f"component {spec.label!r} declared {declared} but is {reg.regime.value} with k={spec.k}"
                    f" (block {actual})"
                )
        if self.N < 2 or self.R < 3:
            raise ValueError("need N >= 2 and R >= 3")
        if self.history not in HISTORY_MODES:
            raise ValueError(f"history must be one of {HISTORY_MODES}")
        if not self.tolerance_se > 0:
            raise ValueError("tolerance_se must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        SeedPolicy(self.seed)
        return self

    @property
    def J(self) -> int:
        return len(self.specs)

    def to_dict(self) -> dict:
        comps = []
        for s, b in zip(self.specs, self.blocks):
            d = s.to_dict()
            d["block"] = b
            comps.append(d)
        return {
            "N": self.N,
            "R": self.R,
            "seed": self.seed,
            "grid": list(self.grid.points),
            "noise": self.noise.distribution.value,
            "history": self.history,
            "tolerance_se": self.tolerance_se,
            "components": comps,
        }


# ---------------------------------------------------------------------------
# simulation


def _brownian_spec() -> ChaosProcessSpec:
    # X(n) = eps_{n-1}: its partial sums over sqrt(N) are W_N
    return ChaosProcessSpec(Explicit([1.0]), 1, "W_N")


def simulate_levels(config: ExperimentConfig, specs=None) -> tuple[np.ndarray, list]:
    """Normalized partial sums Y[r, j, g] for ``specs`` (default: config.specs).

    Replications are produced in fixed-size batches whose results do not
    depend on how many threads run them.
    """
    specs = list(config.specs if specs is None else specs)
    N, R = config.N, config.R
    plans = [exact_variance_plan(effective_spec(s, N, config.history), N) for s in specs]
    scale = np.array([p.value for p in plans])
    ends = config.grid.ends(N)
    policy = SeedPolicy(config.seed)
    batch = config.batch or _default_batch(N)
    starts = list(range(0, R, batch))

    def work(lo):
        n = min(batch, R - lo)
        pm = simulate_vector(specs, config.noise, policy, N, n, first_replication=lo, history=config.history)
        return partial_sums_at(pm.values, ends) / scale[None, :, None]

    if config.threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(lo) for lo in starts]
    return np.concatenate(parts, axis=0), plans


# ---------------------------------------------------------------------------
# diagnostics


def gaussianity_check(samples, tolerance_se: float = 4.0, min_samples: int = 500) -> dict:
    """Skewness and excess kurtosis against the normal null (se sqrt(6/R), sqrt(24/R))."""
    x = np.asarray(samples, dtype=float).ravel()
    R = x.size
    if R < min_samples:
        raise ValueError(f"gaussianity check needs at least {min_samples} samples, got {R}")
    c = x - x.mean()
    m2 = np.mean(c**2)
    skew = float(np.mean(c**3) / m2**1.5)
    kurt = float(np.mean(c**4) / m2**2 - 3.0)
    z_skew = skew / math.sqrt(6.0 / R)
    z_kurt = kurt / math.sqrt(24.0 / R)
    return {
        "R": R,
        "skewness": skew,
        "excess_kurtosis": kurt,
        "z_skewness": z_skew,
        "z_kurtosis": z_kurt,
        "flag_skewness": abs(z_skew) > tolerance_se,
        "flag_kurtosis": abs(z_kurt) > tolerance_se,
    }


def _sign(x: float) -> float:
    return 1.0 if x > 0 else -1.0 if x < 0 else 0.0


def _coef_sum(spec: ChaosProcessSpec) -> float:
    return float(np.sum(spec.coeffs.values(spec.coeffs.M)))


def brownian_functional_check(config: ExperimentConfig, levels: np.ndarray | None = None,
                              brownian: np.ndarray | None = None) -> list[dict]:
    """Co-convergence of the S1 block to one Brownian motion W.

    For every t: corr(Y_p(t), Y_q(t)) against sign(sum a_p) sign(sum a_q)
    for S1 pairs, and corr(Y_p(t), W_N(t)) against sign(sum a_p), with
    W_N(t) = N^-1/2 sum_{n <= [Nt]} eps_{n-1}.  ``exact_corr`` is the
    finite-N value of the same correlation.
    """
    config.validate()
    s1 = [j for j, b in enumerate(config.blocks) if b == "S1"]
    if not s1:
        raise ValueError("brownian functional check needs a nonempty S1 block")
    if levels is None or brownian is None:
        specs = [config.specs[j] for j in s1] + [_brownian_spec()]
        lv, _ = simulate_levels(config, specs)
        levels = np.full((config.R, config.J, len(config.grid)), np.nan)
        levels[:, s1, :] = lv[:, :-1, :]
        brownian = lv[:, -1, :]
    N = config.N
    ends = config.grid.ends(N)
    wspec = _brownian_spec()
    eff = {j: effective_spec(config.specs[j], N, config.history) for j in s1}
    var = {j: np.diag(partial_sum_covariance_grid(eff[j], eff[j], ends)) for j in s1}
    rows = []
    tol = config.tolerance_se

    def zscore(r, ref, se):
        # identical or sign-flipped sums give |corr| = 1 up to rounding, with se near 0
        if abs(r - ref) <= ROUNDING_TOL:
            return 0.0
        return (r - ref) / se if se > 0 else math.inf

    def row(a_label, b_label, g, x, y, target, exact):
        r, se = jackknife_corr(x, y)
        z = zscore(r, target, se)
        z_exact = zscore(r, exact, se)
        return {
            "a": a_label, "b": b_label, "t": config.grid.points[g], "corr": r, "se": se,
            "target": target, "z": z, "exact_corr": exact, "z_exact": z_exact,
            "deterministic_gap": target - exact, "pass": bool(abs(z) <= tol),
        }

    for g, t in enumerate(config.grid.points):
        wvar = float(ends[g])
        for ia, p in enumerate(s1):
            sp = config.specs[p]
            cw = partial_sum_covariance_grid(eff[p], wspec, [ends[g]])[0, 0]
            exact = cw / math.sqrt(var[p][g] * wvar) if wvar > 0 else float("nan")
            rows.append(row(sp.label, "W_N", g, levels[:, p, g], brownian[:, g], _sign(_coef_sum(sp)), exact))
            for q in s1[ia + 1 :]:
                sq = config.specs[q]
                c = partial_sum_covariance_grid(eff[p], eff[q], [ends[g]])[0, 0]
                exact = c / math.sqrt(var[p][g] * var[q][g])
                target = _sign(_coef_sum(sp)) * _sign(_coef_sum(sq))
                rows.append(row(sp.label, sq.label, g, levels[:, p, g], levels[:, q, g], target, exact))
    return rows


@dataclass
class HypercontractivityReport:
    k: int
    noise: str
    R: int
    constant: float
    m2: float
    m2_se: float
    m4: float
    m4_se: float
    m2_exact: float
    slack: float
    slack_se: float
    z_second_moment: float
    passed: bool
    second_moment_agrees: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def hypercontractivity_check(h: DiscreteKernel, k: int, noise: NoiseSpec, R: int, seed: int = 0,
                             tolerance_se: float = 4.0, batch: int = 4096) -> HypercontractivityReport:
    """Monte Carlo check of E Q^4 <= (3 + 2 E eps^4)^(2k) (E Q^2)^2.

    PASS iff the estimated E Q^4 is at most c times the squared estimated
    E Q^2 plus ``tolerance_se`` jackknife standard errors of the difference.
    E Q^2 is also computed exactly from the kernel for a cross-check.
    """
    if h.k != k:
        raise ValueError(f"kernel order {h.k} does not match k={k}")
    if h.size == 0:
        raise ValueError("kernel has empty support")
    if not math.isfinite(h.l1_norm()):
        raise ValueError("kernel must be absolutely summable")
    if R < 3:
        raise ValueError("need at least 3 replications")
    policy = SeedPolicy(seed)
    lo, hi = h.span
    q = np.empty(R)
    for s in range(0, R, batch):
        reps = list(range(s, min(R, s + batch)))
        win = noise_window(noise, policy, reps, lo, hi)
        q[s : s + len(reps)] = evaluate_polynomial_form(h, win)
    c = (3.0 + 2.0 * noise.fourth_moment) ** (2 * k)
    q2, q4 = q**2, q**4
    m2, m4 = float(q2.mean()), float(q4.mean())
    n = R - 1
    m2_loo = (q2.sum() - q2) / n
    m4_loo = (q4.sum() - q4) / n
    slack_loo = c * m2_loo**2 - m4_loo
    slack = c * m2**2 - m4
    slack_se = float(jackknife_se(slack_loo))
    m2_se = float(jackknife_se(m2_loo))
    m4_se = float(jackknife_se(m4_loo))
    exact = h.second_moment()
    z2 = (m2 - exact) / m2_se if m2_se > 0 else (0.0 if m2 == exact else math.inf)
    return HypercontractivityReport(
        k=k, noise=noise.distribution.value, R=R, constant=c, m2=m2, m2_se=m2_se, m4=m4, m4_se=m4_se,
        m2_exact=exact, slack=slack, slack_se=slack_se, z_second_moment=z2,
        passed=bool(m4 <= c * m2**2 + tolerance_se * slack_se),
        second_moment_agrees=bool(abs(z2) <= tolerance_se),
    )


# ---------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentReport:
    """Empirical against theoretical second-order structure of {Y_j(t_g)}.

    Matrices are indexed by (component, time) pairs flattened component-major.
    ``kind`` labels each entry: ``srd``, ``zero``, ``hermite`` (asserted) or
    ``reported`` (no limit target).
    """

    config: ExperimentConfig
    labels: list
    times: list
    cov: np.ndarray
    se: np.ndarray
    target: np.ndarray
    exact: np.ndarray
    kind: np.ndarray
    normalizations: list
    independence: list
    normality: list
    temporal: list
    brownian: list
    verdicts: dict

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.cov - self.target) / self.se

    @property
    def z_exact(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.cov - self.exact) / self.se

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def entry(self, label_p: str, t_p: float, label_q: str, t_q: float) -> dict:
        G = len(self.times)
        a = self.labels.index(label_p) * G + self.times.index(t_p)
        b = self.labels.index(label_q) * G + self.times.index(t_q)
        return {
            "cov": self.cov[a, b], "se": self.se[a, b], "target": self.target[a, b],
            "exact": self.exact[a, b], "kind": self.kind[a, b], "z": self.z[a, b],
        }

    def covariance_rows(self) -> list[dict]:
        G = len(self.times)
        rows = []
        z, ze = self.z, self.z_exact
        P = self.cov.shape[0]
        for a in range(P):
            for b in range(a, P):
                asserted = self.kind[a, b] != "reported"
                rows.append({
                    "p": self.labels[a // G], "s": self.times[a % G],
                    "q": self.labels[b // G], "t": self.times[b % G],
                    "empirical": self.cov[a, b], "se": self.se[a, b],
                    "target": self.target[a, b], "exact": self.exact[a, b],
                    "z": z[a, b], "z_exact": ze[a, b], "kind": self.kind[a, b],
                    "asserted": asserted,
                    "pass": bool(abs(z[a, b]) <= self.config.tolerance_se) if asserted else "",
                })
        return rows


def _targets(config: ExperimentConfig, plans) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    J, G = config.J, len(config.grid)
    times = np.array(config.grid.points)
    smin = np.minimum.outer(times, times)
    P = J * G
    target = np.full((P, P), np.nan)
    exact = np.zeros((P, P))
    kind = np.empty((P, P), dtype=object)
    ends = config.grid.ends(config.N)
    eff = [effective_spec(s, config.N, config.history) for s in config.specs]
    sigma = {}

    def sig(j):
        if j not in sigma:
            sigma[j] = long_run_sigma(config.specs[j])
        return sigma[j]

    for p in range(J):
        for q in range(p, J):
            sp, sq = config.specs[p], config.specs[q]
            bp, bq = config.blocks[p], config.blocks[q]
            blk = (slice(p * G, (p + 1) * G), slice(q * G, (q + 1) * G))
            ex = partial_sum_covariance_grid(eff[p], eff[q], ends) / (plans[p].value * plans[q].value)
            exact[blk] = ex
            if sp.k != sq.k or {bp, bq} == {"S2", "L"}:
                target[blk], kind[blk] = 0.0, "zero"
            elif bp != "L" and bq != "L":
                rho = 1.0 if p == q else long_run_cross(sp, sq) / (sig(p) * sig(q))
                target[blk], kind[blk] = rho * smin, "srd"
            elif p == q:
                hs = HermiteSpec(sp.k, sp.coeffs.memory_d)
                target[blk] = np.array([[hermite_covariance(hs, s, t) for t in times] for s in times])
                kind[blk] = "hermite"
            else:
                kind[blk] = "reported"
            if p != q:
                target[blk[1], blk[0]] = target[blk].T
                exact[blk[1], blk[0]] = ex.T
                kind[blk[1], blk[0]] = kind[blk].T
    return target, exact, kind


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    config.validate()
    J, G, tol = config.J, len(config.grid), config.tolerance_se
    has_s1 = "S1" in config.blocks
    specs = list(config.specs) + ([_brownian_spec()] if has_s1 else [])
    levels, plans = simulate_levels(config, specs)
    brownian = levels[:, J, :] if has_s1 else None
    levels = levels[:, :J, :]
    plans = plans[:J]
    flat = levels.reshape(config.R, J * G)
    cov, se = jackknife_cov(flat)
    target, exact, kind = _targets(config, plans)
    labels = [s.label for s in config.specs]
    times = list(config.grid.points)

    with np.errstate(divide="ignore", invalid="ignore"):
        z = (cov - target) / se
    asserted = kind != "reported"
    srd_mask = (kind == "srd") | (kind == "zero")
    verdicts = {}
    if srd_mask.any():
        verdicts["covariance"] = bool(np.all(np.abs(z[srd_mask]) <= tol))
    lrd_mask = kind == "hermite"

    # temporal structure per component
    temporal = []
    for j, spec in enumerate(config.specs):
        block = config.blocks[j]
        x = levels[:, j, :]
        if block == "L":
            hs = HermiteSpec(spec.k, spec.coeffs.memory_d)
            for g, t in enumerate(times):
                v = x[:, g]
                var = float(np.var(v, ddof=1))
                n = config.R - 1
                loo = ((v**2).sum() - v**2 - ((v.sum() - v) ** 2) / n) / (n - 1)
                s = float(jackknife_se(loo))
                tgt = hermite_covariance(hs, t, t)
                ex = exact[j * G + g, j * G + g]
                temporal.append({"component": spec.label, "statistic": "variance", "s": t, "t": t,
                                 "value": var, "se": s, "target": tgt, "exact": ex,
                                 "z": (var - tgt) / s, "pass": bool(abs(var - tgt) <= tol * s)})
        else:
            gt = G - 1
            for g, s_ in enumerate(times[:-1]):
                a, b = x[:, g], x[:, gt]
                n = config.R - 1
                sab = (a * b).sum() - a * b
                sa, sb = a.sum() - a, b.sum() - b
                sbb = (b * b).sum() - b * b
                loo = (sab - sa * sb / n) / (sbb - sb * sb / n)
                val = float(np.cov(a, b)[0, 1] / np.var(b, ddof=1))
                s = float(jackknife_se(loo))
                tgt = s_ / times[gt]
                ex = exact[j * G + g, j * G + gt] / exact[j * G + gt, j * G + gt]
                temporal.append({"component": spec.label, "statistic": "cov_ratio", "s": s_, "t": times[gt],
                                 "value": val, "se": s, "target": tgt, "exact": ex,
                                 "z": (val - tgt) / s, "pass": bool(abs(val - tgt) <= tol * s)})
    if lrd_mask.any():
        lrd_rows = [r for r in temporal if r["statistic"] == "variance"]
        verdicts["lrd_scaling"] = all(r["pass"] for r in lrd_rows)

    # independence of S2 from S1 and L: levels and squares at equal times
    independence = []
    for p in range(J):
        for q in range(J):
            bp, bq = config.blocks[p], config.blocks[q]
            if bp != "S2" or bq == "S2":
                continue
            for g, t in enumerate(times):
                x, y = levels[:, p, g], levels[:, q, g]
                for stat, (u, v) in (("level", (x, y)), ("square", (x * x, y * y))):
                    r, s = jackknife_corr(u, v)
                    independence.append({"a": config.specs[p].label, "b": config.specs[q].label,
                                         "block_a": bp, "block_b": bq, "t": t, "statistic": stat,
                                         "corr": r, "se": s, "z": r / s, "asserted": True,
                                         "pass": bool(abs(r) <= tol * s)})
    # S1 against L: reported only
    for p in range(J):
        for q in range(J):
            if config.blocks[p] == "S1" and config.blocks[q] == "L":
                for g, t in enumerate(times):
                    x, y = levels[:, p, g], levels[:, q, g]
                    for stat, (u, v) in (("level", (x, y)), ("square", (x * x, y * y))):
                        r, s = jackknife_corr(u, v)
                        independence.append({"a": config.specs[p].label, "b": config.specs[q].label,
                                             "block_a": "S1", "block_b": "L", "t": t, "statistic": stat,
                                             "corr": r, "se": s, "z": r / s, "asserted": False, "pass": ""})
    asserted_ind = [r for r in independence if r["asserted"]]
    if asserted_ind:
        verdicts["independence"] = all(r["pass"] for r in asserted_ind)

    # marginal normality
    normality = []
    for j, spec in enumerate(config.specs):
        for g, t in enumerate(times):
            if config.R < 500:
                continue
            d = gaussianity_check(levels[:, j, g], tol)
            d.update({"component": spec.label, "block": config.blocks[j], "t": t,
                      "asserted": config.blocks[j] != "L"})
            normality.append(d)
    srd_norm = [r for r in normality if r["asserted"]]
    if srd_norm:
        verdicts["gaussianity"] = not any(r["flag_skewness"] or r["flag_kurtosis"] for r in srd_norm)

    brownian_rows = []
    if has_s1:
        brownian_rows = brownian_functional_check(config, levels, brownian)
        verdicts["brownian"] = all(r["pass"] for r in brownian_rows)

    norms = [{"component": s.label, "block": b, "A": p.value, "mode": p.mode.value}
             for s, b, p in zip(config.specs, config.blocks, plans)]
    return ExperimentReport(config, labels, times, cov, se, target, exact, kind, norms,
                            independence, normality, temporal, brownian_rows, verdicts)


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv(path: str, rows: list[dict], columns: list[str] | None = None) -> str:
    """UTF-8 CSV with a header row; columns in lexicographic order unless given."""
    if columns is None:
        columns = sorted({key for r in rows for key in r})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])
    return path


def _summary_text(report: ExperimentReport) -> str:
    cfg = report.config
    lines = [
        "chaoslim experiment summary",
        f"N={cfg.N} R={cfg.R} seed={cfg.seed} noise={cfg.noise.distribution.value} history={cfg.history}",
        f"grid={list(cfg.grid.points)} tolerance={cfg.tolerance_se} se",
        "components: " + ", ".join(f"{s.label}[{b}, k={s.k}]" for s, b in zip(cfg.specs, cfg.blocks)),
        "",
    ]
    z = report.z
    for name in ("srd", "zero", "hermite"):
        mask = report.kind == name
        if mask.any():
            lines.append(f"max |z| over {name} entries: {np.nanmax(np.abs(z[mask])):.3f} ({int(mask.sum())} entries)")
    for r in report.independence:
        if r["asserted"]:
            continue
        lines.append(f"reported {r['a']}~{r['b']} t={r['t']} {r['statistic']} corr={r['corr']:.4f} (se {r['se']:.4f})")
    for r in report.brownian:
        lines.append(
            f"brownian {r['a']}~{r['b']} t={r['t']}: corr={r['corr']:.8f} target={r['target']:+.0f} "
            f"z={r['z']:.2f}; exact finite-N corr={r['exact_corr']:.8f} z={r['z_exact']:.2f}"
        )
    lines.append("")
    for k, v in report.verdicts.items():
        lines.append(f"{k}: {'PASS' if v else 'FAIL'}")
    lines.append(f"overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, out_dir: str) -> list[str]:
    """Write the CSV set and summary.txt; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [
        write_csv(os.path.join(out_dir, "covariance.csv"), report.covariance_rows()),
        write_csv(os.path.join(out_dir, "independence.csv"), report.independence),
        write_csv(os.path.join(out_dir, "normality.csv"), report.normality),
        write_csv(os.path.join(out_dir, "temporal.csv"), report.temporal),
        write_csv(os.path.join(out_dir, "normalization.csv"), report.normalizations),
        write_csv(os.path.join(out_dir, "verdicts.csv"),
                  [{"check": k, "pass": v} for k, v in report.verdicts.items()]),
    ]
    if report.brownian:
        paths.append(write_csv(os.path.join(out_dir, "brownian.csv"), report.brownian))
    summary = os.path.join(out_dir, "summary.txt")
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write(_summary_text(report))
    paths.append(summary)
    return paths
