"""Experiment configuration files.

A configuration is a JSON document::

    {
      "N": 16384, "R": 2000, "seed": 1,
      "noise": "gaussian",               # gaussian | rademacher | uniform | exponential
      "grid": [0.25, 0.5, 0.75, 1.0],
      "history": "aggregated",           # aggregated | truncated
      "tolerance_se": 4.0,
      "components": [
        {"label": "S1", "block": "S1", "k": 1,
         "coefficients": {"family": "explicit", "values": [0.5, 0.5]}},
        {"label": "S2", "block": "S2", "k": 2,
         "coefficients": {"family": "geometric", "ratio": 0.5}},
        {"label": "L", "block": "L", "k": 2,
         "coefficients": {"family": "regvar", "d": 0.4, "L": {"kind": "constant", "c": 1.0}}}
      ]
    }

Coefficient families: ``regvar`` (d, optional L and M), ``explicit``
(values, optional M), ``bounded`` (d, c, values), ``geometric`` (ratio,
optional first, d, tol).  Kernel files for the hypercontractivity check
carry ``k``, ``noise``, ``R``, ``seed`` and either ``indices`` plus
``values`` or a ``random`` block (``count``, ``width``, ``seed``).

Errors name the offending field and, where it can be found, the line.
"""

from __future__ import annotations

import json
import re

import numpy as np

from .coefficients import (
    BoundedDecay,
    CoefficientSpec,
    Explicit,
    RegVar,
    SlowlyVarying,
    geometric,
)
from .harness import ExperimentConfig
from .noise import NoiseSpec
from .partial_sums import TimeGrid
from .process import ChaosProcessSpec, DiscreteKernel

__all__ = [
    "ConfigError",
    "load_json",
    "parse_coefficients",
    "parse_component",
    "parse_experiment",
    "load_experiment",
    "parse_kernel",
    "random_kernel",
]


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is a dotted path, ``line`` 1-based or None."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


def load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config ({exc.msg}, column {exc.colno})", line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", line=1)
    return data


def _locate(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


class _Ctx:
    def __init__(self, text: str | None):
        self.text = text

    def fail(self, field: str, message: str):
        key = field.rsplit(".", 1)[-1].split("[")[0]
        raise ConfigError(message, field, _locate(self.text, key))

    def get(self, obj: dict, key: str, path: str, kind=None, default=...):
        if key not in obj:
            if default is ...:
                self.fail(f"{path}.{key}" if path else key, "missing required field")
            return default
        val = obj[key]
        if kind is not None:
            try:
                if kind is int:
                    if isinstance(val, bool) or float(val) != int(val):
                        raise ValueError
                    val = int(val)
                elif kind is float:
                    if isinstance(val, bool):
                        raise ValueError
                    val = float(val)
                elif kind is str and not isinstance(val, str):
                    raise ValueError
            except (TypeError, ValueError):
                self.fail(f"{path}.{key}" if path else key, f"expected {kind.__name__}, got {val!r}")
        return val


def parse_coefficients(obj: dict, path: str = "coefficients", ctx: _Ctx | None = None) -> CoefficientSpec:
    ctx = ctx or _Ctx(None)
    if not isinstance(obj, dict):
        ctx.fail(path, "expected an object")
    family = ctx.get(obj, "family", path, str)
    try:
        if family == "regvar":
            d = ctx.get(obj, "d", path, float)
            if not 0 < d < 0.5:
                ctx.fail(f"{path}.d", f"d must lie in (0, 1/2) for regularly varying coefficients, got {d}")
            Lobj = obj.get("L", {"kind": "constant"})
            kind = Lobj.get("kind", "constant")
            param = {"constant": Lobj.get("c", 1.0), "logpower": Lobj.get("p", 1.0), "iterlog": 0.0}.get(kind)
            if param is None:
                ctx.fail(f"{path}.L.kind", f"unknown slowly varying kind {kind!r}")
            M = ctx.get(obj, "M", path, int, None)
            return RegVar(d, SlowlyVarying(kind, float(param)), M)
        if family == "explicit":
            vals = ctx.get(obj, "values", path)
            return Explicit(tuple(vals), ctx.get(obj, "M", path, int, None))
        if family == "bounded":
            return BoundedDecay(ctx.get(obj, "d", path, float), tuple(ctx.get(obj, "values", path)),
                                ctx.get(obj, "c", path, float), ctx.get(obj, "M", path, int, None))
        if family == "geometric":
            return geometric(ctx.get(obj, "ratio", path, float), ctx.get(obj, "first", path, float, 1.0),
                             ctx.get(obj, "d", path, float, -1.0), ctx.get(obj, "tol", path, float, 1e-12))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        ctx.fail(path, str(exc))
    ctx.fail(f"{path}.family", f"unknown coefficient family {family!r}")


def parse_component(obj: dict, path: str, ctx: _Ctx) -> tuple[ChaosProcessSpec, str | None]:
    if not isinstance(obj, dict):
        ctx.fail(path, "expected an object")
    k = ctx.get(obj, "k", path, int)
    if k < 1:
        ctx.fail(f"{path}.k", f"chaos order must be a positive integer, got {k}")
    label = ctx.get(obj, "label", path, str, path)
    coeffs = parse_coefficients(ctx.get(obj, "coefficients", path), f"{path}.coefficients", ctx)
    return ChaosProcessSpec(coeffs, k, label), obj.get("block")


def parse_experiment(data: dict, text: str | None = None) -> ExperimentConfig:
    ctx = _Ctx(text)
    comps = ctx.get(data, "components", "")
    if not isinstance(comps, list) or not comps:
        ctx.fail("components", "expected a nonempty list")
    specs, blocks = [], []
    for i, c in enumerate(comps):
        s, b = parse_component(c, f"components[{i}]", ctx)
        if b is None:
            ctx.fail(f"components[{i}].block", "every component must declare its block (S1, S2 or L)")
        specs.append(s)
        blocks.append(b)
    try:
        grid = TimeGrid(tuple(data["grid"])) if "grid" in data else TimeGrid()
    except (TypeError, ValueError) as exc:
        ctx.fail("grid", str(exc))
    try:
        noise = NoiseSpec(ctx.get(data, "noise", "", str, "gaussian"))
    except ValueError as exc:
        ctx.fail("noise", str(exc))
    cfg = ExperimentConfig(
        specs=specs,
        blocks=blocks,
        N=ctx.get(data, "N", "", int, 2**14),
        R=ctx.get(data, "R", "", int, 2000),
        grid=grid,
        noise=noise,
        seed=ctx.get(data, "seed", "", int, 0),
        tolerance_se=ctx.get(data, "tolerance_se", "", float, 4.0),
        history=ctx.get(data, "history", "", str, "aggregated"),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        msg = str(exc)
        m = re.search(r"component '([^']*)'", msg)
        field = None
        if m and m.group(1) in [s.label for s in specs]:
            field = f"components[{[s.label for s in specs].index(m.group(1))}]"
        raise ConfigError(msg, field, _locate(text, "components") if field else None) from exc
    return cfg


def load_experiment(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    return parse_experiment(load_json(text), text)


def random_kernel(k: int, count: int, width: int, seed: int) -> DiscreteKernel:
    """Kernel with ``count`` distinct increasing k-tuples of span < ``width``
    starting in [0, width) and standard normal values."""
    if width <= k - 1:
        raise ValueError("width must exceed k - 1")
    rng = np.random.default_rng(seed)
    rows = set()
    attempts = 0
    while len(rows) < count and attempts < 100 * count:
        attempts += 1
        start = int(rng.integers(0, width))
        rest = rng.choice(np.arange(1, width), size=k - 1, replace=False)
        rows.add(tuple(sorted([start] + [start + int(r) for r in rest])))
    idx = np.array(sorted(rows), dtype=np.int64)
    return DiscreteKernel(idx, rng.standard_normal(len(idx)))


def parse_kernel(data: dict, text: str | None = None) -> tuple[DiscreteKernel, int, NoiseSpec, int, int]:
    """(kernel, k, noise, R, seed) from a kernel config."""
    ctx = _Ctx(text)
    k = ctx.get(data, "k", "", int)
    try:
        noise = NoiseSpec(ctx.get(data, "noise", "", str, "gaussian"))
    except ValueError as exc:
        ctx.fail("noise", str(exc))
    R = ctx.get(data, "R", "", int, 20000)
    seed = ctx.get(data, "seed", "", int, 0)
    try:
        if "random" in data:
            r = data["random"]
            h = random_kernel(k, ctx.get(r, "count", "random", int, 20), ctx.get(r, "width", "random", int, 10),
                              ctx.get(r, "seed", "random", int, 0))
        else:
            h = DiscreteKernel(np.asarray(ctx.get(data, "indices", ""), dtype=np.int64).reshape(-1, k),
                               np.asarray(ctx.get(data, "values", ""), dtype=float))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        ctx.fail("indices", str(exc))
    return h, k, noise, R, seed
