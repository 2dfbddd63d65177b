"""Binary field snapshots and trajectory directories.

Snapshot layout::

    16 bytes   magic  b"LLGFIELD\\0\\0\\0\\0v001"
    4 bytes    little-endian uint32 header length
    header     UTF-8 JSON {dim, sizes, lengths, dtype, time, epsilon, a, components}
    payload    little-endian samples, row-major, components concatenated

``dtype`` is "f64" (real fields, sphere fields) or "c128" (complex fields).
A trajectory directory holds ``snap_00000.llgf`` ... plus ``manifest.json``.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .spectral_core import Grid
from .trajectory import Trajectory

MAGIC = b"LLGFIELD\x00\x00\x00\x00v001"
_DTYPES = {"f64": np.dtype("<f8"), "c128": np.dtype("<c16")}


class SnapshotFormatError(ValueError):
    pass


def encode_snapshot(grid: Grid, values: np.ndarray, time: float = 0.0, epsilon: float = 0.0,
                    a: float = 1.0) -> bytes:
    values = np.asarray(values)
    components = 1 if values.shape == grid.shape else values.shape[0]
    if values.shape[values.ndim - grid.dim:] != grid.shape or values.ndim > grid.dim + 1:
        raise SnapshotFormatError(f"values of shape {values.shape} do not fit grid {grid.shape}")
    dtype = "c128" if np.iscomplexobj(values) else "f64"
    header = {
        "dim": grid.dim,
        "sizes": list(grid.sizes),
        "lengths": list(grid.lengths),
        "dtype": dtype,
        "time": float(time),
        "epsilon": float(epsilon),
        "a": float(a),
        "components": components,
    }
    hbytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.ascontiguousarray(values, dtype=_DTYPES[dtype]).tobytes()
    return MAGIC + struct.pack("<I", len(hbytes)) + hbytes + payload


def decode_snapshot(blob: bytes) -> tuple[dict, Grid, np.ndarray]:
    if blob[:16] != MAGIC:
        raise SnapshotFormatError("bad magic: not an LLG field snapshot")
    (hlen,) = struct.unpack("<I", blob[16:20])
    header = json.loads(blob[20 : 20 + hlen].decode("utf-8"))
    grid = Grid(tuple(header["sizes"]), tuple(header["lengths"]))
    dtype = _DTYPES.get(header["dtype"])
    if dtype is None:
        raise SnapshotFormatError(f"unknown dtype {header['dtype']!r}")
    comps = int(header.get("components", 1))
    shape = grid.shape if comps == 1 else (comps,) + grid.shape
    payload = blob[20 + hlen :]
    expected = int(np.prod(shape)) * dtype.itemsize
    if len(payload) != expected:
        raise SnapshotFormatError(f"payload has {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=dtype).reshape(shape).astype(dtype.newbyteorder("="))
    return header, grid, values


def write_snapshot(path, grid: Grid, values: np.ndarray, **meta) -> None:
    Path(path).write_bytes(encode_snapshot(grid, values, **meta))


def read_snapshot(path) -> tuple[dict, Grid, np.ndarray]:
    return decode_snapshot(Path(path).read_bytes())


def _manifest(traj: Trajectory, files: list[str]) -> dict:
    meta = {k: v for k, v in traj.meta.items() if k != "grid"}
    return {
        "times": [float(t) for t in traj.times],
        "params": {"epsilon": meta.get("epsilon", 0.0), "a": meta.get("a", 1.0), "dt": meta.get("dt")},
        "integrator": meta.get("integrator", "unknown"),
        "grid": traj.grid.to_dict(),
        "kind": traj.kind,
        "files": files,
        "meta": _jsonable(meta),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def manifest_hash(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def write_trajectory(directory, traj: Trajectory) -> str:
    """Write snapshots plus manifest.json; returns the manifest hash."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    eps = float(traj.meta.get("epsilon", 0.0))
    a = float(traj.meta.get("a", 1.0))
    files = []
    for m, (t, v) in enumerate(zip(traj.times, traj.values)):
        name = f"snap_{m:05d}.llgf"
        write_snapshot(d / name, traj.grid, v, time=float(t), epsilon=eps, a=a)
        files.append(name)
    manifest = _manifest(traj, files)
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest_hash(manifest)


def read_trajectory(directory) -> Trajectory:
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    grid = Grid.from_dict(manifest["grid"])
    values = np.stack([read_snapshot(d / f)[2] for f in manifest["files"]])
    meta = dict(manifest.get("meta", {}))
    meta["manifest_hash"] = manifest_hash(manifest)
    return Trajectory(grid, np.asarray(manifest["times"]), values, meta, kind=manifest.get("kind", "scalar"))


def write_ndjson(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")


def read_ndjson(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
