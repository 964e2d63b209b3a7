"""Command-line entry point: ``chaoslim simulate|acf|experiment|hermite|check``.

Exit codes: 0 success, 2 usage, 3 validation, 4 acceptance failure, 5 runtime.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .coefficients import Explicit, RegVar
from .config import ConfigError, load_json, parse_component, parse_experiment, parse_kernel, _Ctx
from .covariance import cross_gamma_lags, gamma_auto, gamma_lags
from .harness import hypercontractivity_check, run_experiment, write_csv, write_report
from .hermite import HermiteSpec, exact_variance_ratios, hermite_theoretical_variance, simulate_hermite
from .noise import Distribution, NoiseSpec, SeedPolicy
from .partial_sums import TimeGrid
from .pathio import write_paths_binary, write_paths_csv
from .process import ChaosProcessSpec, simulate_vector

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_ACCEPTANCE, EXIT_RUNTIME = 0, 2, 3, 4, 5


class AcceptanceFailure(Exception):
    pass


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        return args.threads
    env = os.environ.get("CHAOSLIM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"CHAOSLIM_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigError("CHAOSLIM_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def _read_config(path: str | None) -> tuple[dict, str]:
    if not path:
        raise ConfigError("--config is required for this command")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    return load_json(text), text


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: str, command: str, config: dict, seed, files: list[str]) -> str:
    manifest = {
        "artifact": "chaoslim",
        "version": __version__,
        "command": command,
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config,
        "files": [
            {"name": os.path.relpath(f, out), "sha256": _sha256(f), "bytes": os.path.getsize(f)}
            for f in sorted(files)
        ],
    }
    path = os.path.join(out, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _apply_overrides(data: dict, args) -> dict:
    data = dict(data)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.grid is not None:
        data["grid"] = [float(x) for x in args.grid.split(",") if x.strip()]
    return data


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    data, text = _read_config(args.config)
    data = _apply_overrides(data, args)
    ctx = _Ctx(text)
    comps = data.get("components")
    if not isinstance(comps, list) or not comps:
        raise ConfigError("expected a nonempty list", "components")
    specs = [parse_component(c, f"components[{i}]", ctx)[0] for i, c in enumerate(comps)]
    N = ctx.get(data, "N", "", int, 1000)
    R = ctx.get(data, "R", "", int, 1)
    seed = ctx.get(data, "seed", "", int, 0)
    history = ctx.get(data, "history", "", str, "aggregated")
    try:
        noise = NoiseSpec(ctx.get(data, "noise", "", str, "gaussian"))
        policy = SeedPolicy(seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if N < 1 or R < 1:
        raise ConfigError("N and R must be positive")
    for s in specs:
        s.regime  # classification validates d and k
    paths = simulate_vector(specs, noise, policy, N, R, history=history)
    os.makedirs(args.out, exist_ok=True)
    if args.format == "bin":
        files = [write_paths_binary(paths, os.path.join(args.out, "paths.bin"))]
    else:
        files = [write_paths_csv(paths, os.path.join(args.out, "paths.csv"))]
    _write_manifest(args.out, "simulate", data, seed, files)
    return EXIT_OK


def _inline_spec(k, d, values, label) -> ChaosProcessSpec:
    if k is None:
        raise ConfigError("--k is required without --config")
    if (d is None) == (values is None):
        raise ConfigError("give exactly one of --d or --values")
    if d is not None:
        try:
            coeffs = RegVar(d)
        except ValueError as exc:
            raise ConfigError(str(exc), "d") from exc
    else:
        coeffs = Explicit(tuple(float(v) for v in values.split(",")))
    return ChaosProcessSpec(coeffs, k, label)


def cmd_acf(args) -> int:
    if args.config:
        data, text = _read_config(args.config)
        ctx = _Ctx(text)
        comps = data.get("components")
        if not isinstance(comps, list) or not comps:
            raise ConfigError("expected a nonempty list", "components")
        specs = [parse_component(c, f"components[{i}]", ctx)[0] for i, c in enumerate(comps[:2])]
        echo = data
    else:
        specs = [_inline_spec(args.k, args.d, args.values, "X")]
        if args.k2 is not None:
            specs.append(_inline_spec(args.k2, args.d2, args.values2, "Y"))
        echo = {"components": [s.to_dict() for s in specs]}
    for s in specs:
        s.regime
    if args.max_lag < 0:
        raise ConfigError("--max-lag must be nonnegative")
    p = specs[0]
    if args.log_lags:
        lags = np.unique(np.round(np.geomspace(1, max(1, args.max_lag), args.log_lags)).astype(int))
        gam = np.array([gamma_auto(p, int(n)) for n in lags])
    else:
        lags = np.arange(args.max_lag + 1)
        gam = gamma_lags(p, args.max_lag)
    rows = []
    reg = p.regime
    theo = 2.0 * reg.d_X - 1.0 if reg.d_X is not None and np.isfinite(reg.d_X) else None
    for i, n in enumerate(lags):
        row = {"lag": int(n), "gamma": float(gam[i])}
        if args.log_lags and i > 0 and gam[i] > 0 and gam[i - 1] > 0 and reg.regime.value == "LRD":
            row["slope"] = float(np.log(gam[i] / gam[i - 1]) / np.log(lags[i] / lags[i - 1]))
            row["slope_theory"] = theo
        rows.append(row)
    if len(specs) > 1:
        q = specs[1]
        m = int(lags.max())
        cross = cross_gamma_lags(p, q, m)
        for row in rows:
            row["gamma_cross"] = float(cross[m + row["lag"]])
            row["gamma_cross_negative"] = float(cross[m - row["lag"]])
    os.makedirs(args.out, exist_ok=True)
    cols = ["lag", "gamma"]
    for extra in ("gamma_cross", "gamma_cross_negative", "slope", "slope_theory"):
        if any(extra in r for r in rows):
            cols.append(extra)
    files = [write_csv(os.path.join(args.out, "acf.csv"), rows, sorted(cols))]
    _write_manifest(args.out, "acf", echo, None, files)
    return EXIT_OK


def cmd_experiment(args) -> int:
    data, text = _read_config(args.config)
    data = _apply_overrides(data, args)
    cfg = parse_experiment(data, text)
    cfg.threads = _threads(args)
    report = run_experiment(cfg)
    files = write_report(report, args.out)
    _write_manifest(args.out, "experiment", cfg.to_dict(), cfg.seed, files)
    print(open(files[-1], encoding="utf-8").read(), end="")
    if not report.passed:
        raise AcceptanceFailure("experiment verdicts failed: "
                                + ", ".join(k for k, v in report.verdicts.items() if not v))
    return EXIT_OK


def cmd_hermite(args) -> int:
    if args.k is None or args.d is None:
        raise ConfigError("hermite needs --k and --d")
    try:
        spec = HermiteSpec(args.k, args.d)
    except ValueError as exc:
        raise ConfigError(str(exc), "d") from exc
    grid = TimeGrid.parse(args.grid) if args.grid else TimeGrid()
    seed = 0 if args.seed is None else args.seed
    N, R = args.N, args.R
    if N < 4 or R < 3:
        raise ConfigError("hermite needs N >= 4 and R >= 3")
    z = simulate_hermite(spec, N, grid, NoiseSpec(args.noise), SeedPolicy(seed), R)
    n = R - 1
    ratios = {m: exact_variance_ratios(spec, m, grid) for m in (N // 4, N // 2, N)}
    rows = []
    for g, t in enumerate(grid.points):
        v = z[:, g]
        loo = ((v**2).sum() - v**2 - ((v.sum() - v) ** 2) / n) / (n - 1)
        se = float(np.sqrt((R - 1) / R * np.sum((loo - loo.mean()) ** 2)))
        rows.append({
            "t": t,
            "theoretical_variance": hermite_theoretical_variance(spec, t),
            "mc_variance": float(np.var(v, ddof=1)),
            "se": se,
            "exact_ratio_N": float(ratios[N][g]),
            "exact_ratio_N_half": float(ratios[N // 2][g]),
            "exact_ratio_N_quarter": float(ratios[N // 4][g]),
        })
    os.makedirs(args.out, exist_ok=True)
    files = [write_csv(os.path.join(args.out, "hermite.csv"), rows)]
    echo = {"k": spec.k, "d": spec.d, "H": spec.H, "N": N, "R": R, "grid": list(grid.points),
            "noise": args.noise}
    _write_manifest(args.out, "hermite", echo, seed, files)
    return EXIT_OK


def cmd_check(args) -> int:
    data, text = _read_config(args.config)
    data = _apply_overrides(data, args)
    h, k, noise, R, seed = parse_kernel(data, text)
    rep = hypercontractivity_check(h, k, noise, R, seed)
    os.makedirs(args.out, exist_ok=True)
    files = [write_csv(os.path.join(args.out, "check.csv"), [rep.to_dict()])]
    _write_manifest(args.out, "check", data, seed, files)
    print(f"E Q^4 = {rep.m4:.6g} <= c (E Q^2)^2 = {rep.constant * rep.m2 ** 2:.6g} "
          f"(slack {rep.slack:.6g}, se {rep.slack_se:.3g}): {'PASS' if rep.passed else 'FAIL'}")
    if not (rep.passed and rep.second_moment_agrees):
        raise AcceptanceFailure("hypercontractivity check failed")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaoslim", description="Discrete-chaos process simulation and limit-theorem checks.")
    parser.add_argument("--version", action="version", version=f"chaoslim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="DIR", default="chaoslim-out")
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--threads", type=int, metavar="N")
    common.add_argument("--grid", metavar="t1,t2,...")
    common.add_argument("--format", choices=("csv", "bin"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="simulate paths").set_defaults(func=cmd_simulate)

    acf = sub.add_parser("acf", parents=[common], help="autocovariance and cross-covariance table")
    acf.add_argument("--k", type=int)
    acf.add_argument("--d", type=float)
    acf.add_argument("--values")
    acf.add_argument("--k2", type=int)
    acf.add_argument("--d2", type=float)
    acf.add_argument("--values2")
    acf.add_argument("--max-lag", type=int, default=10)
    acf.add_argument("--log-lags", type=int, default=0, metavar="COUNT",
                     help="use COUNT log-spaced lags up to --max-lag and add a slope column")
    acf.set_defaults(func=cmd_acf)

    sub.add_parser("experiment", parents=[common], help="run a limit-theorem experiment").set_defaults(
        func=cmd_experiment)

    her = sub.add_parser("hermite", parents=[common], help="Hermite approximant variance table")
    her.add_argument("--k", type=int)
    her.add_argument("--d", type=float)
    her.add_argument("--N", type=int, default=2**16)
    her.add_argument("--R", type=int, default=2000)
    her.add_argument("--noise", default="gaussian", choices=[d.value for d in Distribution])
    her.set_defaults(func=cmd_hermite)

    sub.add_parser("check", parents=[common], help="hypercontractivity check for a kernel").set_defaults(
        func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.grid is not None:
            try:
                TimeGrid.parse(args.grid)
            except ValueError as exc:
                raise ConfigError(str(exc), "grid") from exc
        return args.func(args)
    except AcceptanceFailure as exc:
        print(f"chaoslim: acceptance failure: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE
    except (ConfigError, ValueError) as exc:
        print(f"chaoslim: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"chaoslim: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
