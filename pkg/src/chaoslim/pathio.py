"""Reading and writing simulated paths.

CSV (long format): header ``j,n,r,value``, one row per (replication r,
component j, time n), values written with ``repr`` so they round-trip.

Binary: little-endian; magic ``CHLM``, u32 format version, u64 N, u32 J,
u32 R, then R*J*N float64 values in (r, j, n) row-major order.
"""

from __future__ import annotations

import csv
import struct

import numpy as np

from .process import PathMatrix

__all__ = ["write_paths_csv", "read_paths_csv", "write_paths_binary", "read_paths_binary", "MAGIC"]

MAGIC = b"CHLM"
VERSION = 1
_HEADER = struct.Struct("<4sIQII")


def write_paths_csv(paths: PathMatrix, path: str) -> str:
    v = paths.values
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "n", "r", "value"])
        for r in range(paths.R):
            for j in range(paths.J):
                row = v[r, j]
                for n in range(paths.N):
                    w.writerow([j, n + 1, paths.replications[r], repr(float(row[n]))])
    return path


def read_paths_csv(path: str) -> PathMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    j = np.array([int(r["j"]) for r in rows])
    n = np.array([int(r["n"]) for r in rows])
    rep = np.array([int(r["r"]) for r in rows])
    reps = sorted(set(rep.tolist()))
    ridx = {r: i for i, r in enumerate(reps)}
    out = np.zeros((len(reps), j.max() + 1, n.max()))
    out[[ridx[r] for r in rep], j, n - 1] = [float(r["value"]) for r in rows]
    return PathMatrix(out, replications=tuple(reps))


def write_paths_binary(paths: PathMatrix, path: str) -> str:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, paths.N, paths.J, paths.R))
        fh.write(np.ascontiguousarray(paths.values, dtype="<f8").tobytes())
    return path


def read_paths_binary(path: str) -> PathMatrix:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, N, J, R = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a path file (bad magic {magic!r})")
        if version != VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != R * J * N:
        raise ValueError(f"{path}: expected {R * J * N} values, found {data.size}")
    return PathMatrix(data.reshape(R, J, N).astype(np.float64))
