"""Deterministic on-disk artifacts: CSV tables, JSON records, manifests.

Floats are written with 17 significant digits (round-trip exact for IEEE
doubles) and no timestamps or environment data are embedded, so rerunning a
command with identical inputs reproduces every artifact byte for byte. Each
run directory gets a ``manifest.json`` listing the artifacts with their
SHA-256 digests.
"""
from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .errors import IOFailure

__all__ = [
    "canonical_json",
    "sha256_file",
    "write_boundary_csv",
    "write_json",
    "write_manifest",
    "write_slice_csv",
    "write_table",
    "write_trajectory_csv",
]


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_table(path, header, rows) -> None:
    """Comma-separated table with one header line; floats at 17 digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def write_trajectory_csv(path, traj) -> None:
    """Columns: t, one per coordinate, then one per velocity when stored."""
    n = traj.n_vars
    axes = [f"x{i + 1}" for i in range(n)]
    header = ["t"] + axes
    blocks = [traj.times[:, None], traj.states]
    if traj.velocities is not None:
        header += [f"v{i + 1}" for i in range(n)]
        blocks.append(traj.velocities)
    write_table(path, header, np.hstack(blocks))


def write_slice_csv(path, grid) -> None:
    """Flattened grid: coordinate column(s) then the energy."""
    if grid.ndim == 1:
        rows = np.column_stack([grid.coords[0], grid.values])
        write_table(path, [grid.axes[0], "energy"], rows)
        return
    c0, c1 = np.meshgrid(*grid.coords, indexing="ij")
    rows = np.column_stack([c0.ravel(), c1.ravel(), grid.values.ravel()])
    write_table(path, [grid.axes[0], grid.axes[1], "energy"], rows)


def write_boundary_csv(path, curve) -> None:
    write_table(path, ["r", "i_disc", "i_cont", "residual"],
                np.column_stack([curve.r, curve.i_disc,
                                 curve.i_cont, curve.residual]))


def canonical_json(obj) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2,
                      ensure_ascii=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else _fmt(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(canonical_json(obj))
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for block in iter(lambda: fh.read(1 << 16), b""):
                digest.update(block)
    except OSError as exc:
        raise IOFailure(f"cannot hash {path}: {exc}") from exc
    return digest.hexdigest()


def write_manifest(out_dir, command: str, parameters: dict, artifact_names,
                   status: str = "complete") -> str:
    """Write ``manifest.json`` describing a run directory.

    ``artifact_names`` are paths relative to ``out_dir``; each is listed
    with its SHA-256 and size. ``status`` is "complete" for a finished run,
    "incomplete" for an interrupted one.
    """
    artifacts = []
    for name in sorted(artifact_names):
        full = os.path.join(out_dir, name)
        artifacts.append({"name": name,
                          "sha256": sha256_file(full),
                          "bytes": os.path.getsize(full)})
    manifest = {"schema": "washboard-run/1",
                "command": command,
                "status": status,
                "parameters": parameters,
                "artifacts": artifacts}
    path = os.path.join(out_dir, "manifest.json")
    write_json(path, manifest)
    return path
