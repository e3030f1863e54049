"""
Persistence: binary field snapshots, diagnostics CSV, JSON manifests.

Snapshot layout (little endian)::

    b"NSACF1\\n"
    u64 dim, nx, ny
    f64 hx, hy, t
    f64[nx*ny] rho, u_x[, u_y], phi, theta     (row-major, x fastest)
"""
import csv
import json
import struct
from pathlib import Path

import numpy as np

from .errors import MagicMismatchError, SnapshotError, TruncationError
from .grid import GridSpec

MAGIC = b"NSACF1\n"
_HEADER = struct.Struct("<QQQddd")
SCHEMA_VERSION = 1


def field_names(dim):
    return ["rho"] + [f"u{c}" for c in "xy"[:dim]] + ["phi", "theta"]


def write_snapshot(state, path):
    g = state.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(g.dim, g.nx, g.ny, g.hx, g.hy, float(state.t)))
        for arr in [state.rho, *state.u, state.phi, state.theta]:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    from .solver import State

    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if data[: len(MAGIC)] != MAGIC:
        raise MagicMismatchError(f"{path}: bad magic bytes {data[:len(MAGIC)]!r}")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise TruncationError("header")
    dim, nx, ny, hx, hy, t = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    if dim not in (1, 2):
        raise SnapshotError(f"{path}: invalid dim {dim}")
    grid = GridSpec.line(nx, nx * hx) if dim == 1 else GridSpec.plane(nx, ny, nx * hx, ny * hy)
    count = nx * ny
    fields = {}
    for name in field_names(dim):
        end = off + 8 * count
        if len(data) < end:
            raise TruncationError(name)
        fields[name] = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(ny, nx).astype(float)
        off = end
    u = np.stack([fields[f"u{c}"] for c in "xy"[:dim]])
    return State(fields["rho"], u, fields["phi"], fields["theta"], float(t), grid)


def write_diagnostics(rows, path):
    from .solver import DIAG_COLUMNS

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DIAG_COLUMNS)
        for r in rows:
            w.writerow([repr(float(r[c])) for c in DIAG_COLUMNS])


def read_diagnostics(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]} if rows else {}


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def build_run_manifest(cfg, snaps, diag_name, steps, wall_seconds):
    return {
        "kind": "run",
        "schema_version": SCHEMA_VERSION,
        "config": cfg.source if cfg.source is not None else {},
        "snapshots": snaps,
        "diagnostics_csv": diag_name,
        "steps": steps,
        "wall_clock": {"seconds": wall_seconds},
    }


def manifest_snapshot_paths(manifest_path):
    """Absolute snapshot paths and times listed by a run manifest."""
    mpath = Path(manifest_path)
    man = read_json(mpath)
    return [(mpath.parent / s["path"], s["t"]) for s in man["snapshots"]]


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
